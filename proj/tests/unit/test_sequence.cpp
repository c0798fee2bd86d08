// Copyright 2026 The ionswap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ionswap/errors.hpp"
#include "ionswap/random.hpp"
#include "ionswap/sequence.hpp"
#include "ionswap/tomography.hpp"

using namespace ionswap;

namespace {

constexpr double kPi = std::numbers::pi;

const TrapModel& model() {
  static const TrapModel m(calibrate({}));
  return m;
}

World logical_world() {
  World w;
  w.geometry = model().geometry();
  return w;
}

World dynamical_world() {
  World w;
  w.model = &model();
  w.separation.duration = 800;  // the surrogate split is far from adiabatic at 100 us
  return w;
}

bool has_violation(const Sequence& s, const std::string& needle) {
  for (const auto& v : validate(s, TrapGeometry{}))
    if (v.message.find(needle) != std::string::npos) return true;
  return false;
}

const std::vector<std::string> kInputs{"000", "001", "010", "011", "100", "101", "110", "111"};

}  // namespace

TEST(Validate, LaserOutsideLizIsReported) {
  Sequence s;
  s.initial = {{19, {"A"}}};
  s.add(Primitive::rotate("A", kPi, 0));
  EXPECT_TRUE(has_violation(s, "outside the laser interaction zone"));
  s.initial = {{20, {"A"}}};
  EXPECT_TRUE(validate(s, TrapGeometry{}).empty());
}

TEST(Validate, SwapNeedsIsolation) {
  Sequence s;
  s.initial = {{20, {"A", "B"}}, {22, {"C"}}};
  s.add(Primitive::swap(20));
  EXPECT_TRUE(has_violation(s, "within 6 segments"));
  s.initial = {{20, {"A", "B"}}, {26, {"C"}}};
  EXPECT_TRUE(validate(s, TrapGeometry{}).empty());
}

TEST(Validate, TransportRules) {
  Sequence s;
  s.initial = {{18, {"A"}}, {22, {"B"}}};
  s.add(Primitive::transport(18, 24));  // would pass B
  EXPECT_TRUE(has_violation(s, "runs into ions"));
  s.steps = {Primitive::transport(18, 22)};
  EXPECT_TRUE(has_violation(s, "runs into ions"));
  s.steps = {Primitive::transport(18, 31)};
  EXPECT_TRUE(has_violation(s, "outside the trap"));
  s.steps = {Primitive::transport(17, 16)};
  EXPECT_TRUE(has_violation(s, "no ions"));
  s.steps = {Primitive::transport(18, 14)};
  EXPECT_TRUE(validate(s, TrapGeometry{}).empty());
}

TEST(Validate, SeparationAndMergeRules) {
  Sequence s;
  s.initial = {{20, {"A"}}};
  s.add(Primitive::separate(20));
  EXPECT_TRUE(has_violation(s, "at least two"));
  s.initial = {{19, {"A"}}, {21, {"B"}}, {20, {"C"}}};
  s.steps = {Primitive::merge(20)};
  EXPECT_TRUE(has_violation(s, "occupied"));
  s.initial = {{19, {"A"}}, {21, {"B"}}, {24, {"C"}}};
  EXPECT_TRUE(has_violation(s, "within 6 segments"));
  s.initial = {{19, {"A"}}, {21, {"B"}}};
  s.steps = {Primitive::merge(20), Primitive::separate(20)};
  EXPECT_TRUE(validate(s, TrapGeometry{}).empty());
}

TEST(Validate, InitialConfiguration) {
  Sequence s;
  s.initial = {{20, {"A"}}, {20, {"B"}}};
  EXPECT_TRUE(has_violation(s, "share segment"));
  s.initial = {{20, {"A", "B", "C", "D"}}};
  EXPECT_TRUE(has_violation(s, "1 to 3 ions"));
  EXPECT_THROW(run(s, logical_world()), ConfigError);
}

TEST(Reorder, AllInputsValidWithFixedShape) {
  const World w = logical_world();
  for (const auto& bits : kInputs) {
    const auto seq = build_three_ion_reorder(bits);
    EXPECT_TRUE(validate(seq, w.trap()).empty()) << bits;
    const auto res = run(seq, w);
    const auto& r = res.report;
    EXPECT_EQ(r.count(PrimitiveKind::separate), 3);
    EXPECT_EQ(r.count(PrimitiveKind::merge), 3);
    EXPECT_EQ(r.count(PrimitiveKind::swap), 3);
    EXPECT_EQ(r.count(PrimitiveKind::transport), 30);
    EXPECT_EQ(r.transport_hops, 149);
    EXPECT_EQ(r.all_counts.at(PrimitiveKind::separate), 5);
    EXPECT_EQ(r.final_order(), (std::vector<std::string>{"C", "B", "A"}));
  }
}

TEST(Reorder, TimeBudget) {
  const auto r = run(build_three_ion_reorder("101"), logical_world()).report;
  // 149 hops * 28 + 6 * 100 + 3 * 22 us shuttling; 3 pumps, rotations, shelves, readouts.
  EXPECT_NEAR(r.shuttling_us, 149 * 28.0 + 600 + 66, 1e-6);
  EXPECT_NEAR(r.duration_us, r.shuttling_us + 3 * (20 + 5 + 20 + 80), 1e-6);
  EXPECT_GT(r.shuttling_fraction(), 0.88);
  EXPECT_LT(r.shuttling_fraction(), 0.96);
  EXPECT_NEAR(r.duration_us / 1000, 5.7, 0.15 * 5.7);
  double sum = 0;
  for (const auto& e : r.timeline)
    if (e.phase == SequencePhase::process) sum += e.t1 - e.t0;
  EXPECT_NEAR(sum, r.duration_us, 1e-9);
}

TEST(Reorder, NoiselessOutputIsReversedInput) {
  const World w = logical_world();
  for (const auto& bits : kInputs) {
    const auto res = run(build_three_ion_reorder(bits), w);
    const auto p = outcome_probabilities(res.state, {}, res.report.final_order());
    const std::string expected(bits.rbegin(), bits.rend());
    EXPECT_NEAR(p[std::stoul(expected, nullptr, 2)], 1.0, 1e-12) << bits;
    EXPECT_EQ(res.readout_order, (std::vector<std::string>{"B", "C", "A"}));
  }
}

TEST(Reorder, PositionHistoryIsContinuous) {
  const auto r = run(build_three_ion_reorder("011"), logical_world()).report;
  for (const auto& [ion, h] : r.histories) {
    ASSERT_FALSE(h.empty());
    EXPECT_NEAR(h.start(), 0.0, 1e-12);
    EXPECT_NEAR(h.end(), r.total_duration_us, 1e-9);
    for (std::size_t k = 1; k < h.pieces().size(); ++k) {
      EXPECT_NEAR(h.pieces()[k].t0, h.pieces()[k - 1].t1, 1e-9) << ion;
      EXPECT_NEAR(h.pieces()[k].x0, h.pieces()[k - 1].x1, 1e-9) << ion;
    }
  }
  // C ends up parked at the left store, A in the LIZ for the last readout.
  EXPECT_NEAR(r.histories.at("A").pieces().back().x1, 0.0, 1e-9);
  EXPECT_NEAR(r.histories.at("C").pieces().back().x1, -1200.0, 1e-9);
}

TEST(Reorder, LoadingParksIonCAtSegment26) {
  const auto seq = build_three_ion_reorder("000");
  ASSERT_EQ(seq.steps[1].kind, PrimitiveKind::transport);
  EXPECT_EQ(seq.steps[1].to, 26);
  EXPECT_EQ(seq.steps[1].phase, SequencePhase::loading);
  EXPECT_THROW(build_three_ion_reorder("0101"), ConfigError);
  EXPECT_THROW(build_three_ion_reorder("0a1"), ConfigError);
}

TEST(SwapTomography, GridIsValidAndMatchesIdealSwap) {
  const World w = logical_world();
  const auto states = preparation_states();
  const CMatrix s = swap_unitary();
  int settings = 0;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const auto seq = build_swap_tomography(p, q, a, b);
          ASSERT_TRUE(validate(seq, w.trap()).empty());
          const auto res = run(seq, w);
          const auto got = outcome_probabilities(res.state, {}, res.readout_order);
          const auto ideal = setting_probabilities(s * states[std::size_t(4 * p + q)] * s.adjoint());
          for (std::size_t o = 0; o < 4; ++o) EXPECT_NEAR(got[o], ideal[std::size_t(3 * a + b)][o], 1e-12);
          ++settings;
        }
  EXPECT_EQ(settings, 144);
}

TEST(SwapTomography, FieldPhaseIsTracked) {
  // A strong gradient would scramble the analysis without phase tracking.
  World w = logical_world();
  w.field = FieldMap(0.0, 2e-9, 0.0);
  const auto res = run(build_swap_tomography(1, 2, 1, 2), w);
  EXPECT_GT(std::abs(res.report.accumulated_phase.at("A")), 0.1);
  const CMatrix s = swap_unitary();
  const auto ideal = setting_probabilities(s * preparation_states()[6] * s.adjoint());
  const auto got = outcome_probabilities(res.state, {}, res.readout_order);
  for (std::size_t o = 0; o < 4; ++o) EXPECT_NEAR(got[o], ideal[5][o], 1e-12);
}

TEST(SwapTomography, IdentityAnalysisMeasuresZZ) {
  SwapTomographyLayout id;
  id.include_swap = false;
  const auto res = run(build_swap_tomography(3, 0, 0, 0, id), logical_world());
  // A flipped to down, B left up: outcome |down up> = 01 in left-right order.
  const auto p = outcome_probabilities(res.state, {}, res.readout_order);
  EXPECT_NEAR(p[1], 1.0, 1e-12);
  EXPECT_EQ(res.report.count(PrimitiveKind::swap), 0);
}

TEST(Sampling, OutcomeOrderPermutesBits) {
  QubitRegister r({"A", "B", "C"});
  r.pump("A");  // |100> in A,B,C order
  const auto p = outcome_probabilities(r, {}, {"C", "B", "A"});
  EXPECT_NEAR(p[1], 1.0, 1e-15);
  const auto c = sample_outcomes(r, {}, {"B", "A", "C"}, 50, 3);
  EXPECT_EQ(c[2], 50u);
  EXPECT_THROW(outcome_probabilities(r, {}, {"A", "B"}), ConfigError);
}

TEST(EchoProbe, RecoversInjectedGradient) {
  World w = logical_world();
  w.field = FieldMap(0.0, 4e-11, 0.0);
  const int liz = w.trap().liz_segment;
  EchoProbe probe = [&](double x, double hold, std::size_t shots, std::uint64_t seed) {
    std::array<std::uint64_t, 2> out{};
    for (int k = 0; k < 2; ++k) {
      const auto res = run(build_echo_probe(w.trap().nearest_segment(x), hold, k * kPi / 2, liz), w);
      out[std::size_t(k)] = sample_outcomes(res.state, {}, {"A"}, shots, child_seed(seed, std::uint64_t(k)))[1];
    }
    return out;
  };
  const std::vector<double> xs{-400, -200, 0, 200, 400};
  const std::vector<double> holds{0, 50, 100, 150, 200};
  const auto est = ramsey_field_scan(probe, xs, holds, 2000, 17);
  for (const auto& e : est) EXPECT_LT(std::abs(e.delta_b - w.field.delta_b(e.x)), 3 * e.sigma) << e.x;
}

TEST(Timeline, PrintsEverySteps) {
  const auto r = run(build_swap_tomography(0, 0, 0, 0), logical_world()).report;
  std::ostringstream out;
  write_timeline(out, r);
  const auto text = out.str();
  EXPECT_NE(text.find("swap"), std::string::npos);
  EXPECT_NE(text.find("shuttling"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), long(r.timeline.size()) + 2);
}

TEST(Dynamical, AgreesWithLogicalOnTomographySetting) {
  const auto seq = build_swap_tomography(1, 2, 2, 1);
  const auto lg = run(seq, logical_world());
  const auto dy = run(seq, dynamical_world(), RunMode::dynamical);
  ASSERT_TRUE(dy.report.completed) << dy.report.abort_reason;
  const auto a = outcome_probabilities(lg.state, {}, lg.readout_order);
  const auto b = outcome_probabilities(dy.state, {}, dy.readout_order);
  for (std::size_t o = 0; o < 4; ++o) EXPECT_NEAR(a[o], b[o], 1e-9);
  // Every shuttling step reports mode excitation. The merged crystal arrives
  // warm; the swap itself adds little on top.
  int shuttles = 0;
  for (const auto& e : dy.report.timeline) shuttles += is_shuttling(e.kind);
  ASSERT_EQ(int(dy.report.excitations.size()), shuttles);
  int swaps = 0;
  for (std::size_t k = 1; k < dy.report.excitations.size(); ++k) {
    const auto& [step, ex] = dy.report.excitations[k];
    if (seq.steps[step].kind != PrimitiveKind::swap) continue;
    ++swaps;
    const auto& before = dy.report.excitations[k - 1].second;
    EXPECT_LT(ex.max_nbar(), before.max_nbar() + 1.0);
    EXPECT_LT(ex.mode("axial-COM").nbar, before.mode("axial-COM").nbar + 0.1);
  }
  EXPECT_EQ(swaps, 1);
  for (const auto& [step, ex] : dy.report.excitations) EXPECT_LT(ex.max_nbar(), 100.0) << step;
  EXPECT_EQ(dy.report.final_order(), lg.report.final_order());
}

TEST(Dynamical, FailedSwapAbortsWithPartialReport) {
  World w = dynamical_world();
  w.swap.u_d_peak = 0;  // no symmetry breaking: ions do not rotate
  const auto res = run(build_swap_tomography(0, 0, 0, 0), w, RunMode::dynamical);
  EXPECT_FALSE(res.report.completed);
  EXPECT_NE(res.report.abort_reason.find("swap"), std::string::npos);
  EXPECT_FALSE(res.report.timeline.empty());
}

TEST(Dynamical, NeedsModel) {
  EXPECT_THROW(run(build_echo_probe(20, 1, 0), logical_world(), RunMode::dynamical), ConfigError);
}

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
#include <random>

#include "ionswap/errors.hpp"
#include "ionswap/qubit.hpp"
#include "ionswap/units.hpp"

using namespace ionswap;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXcd ket(std::initializer_list<Complex> amps) {
  Eigen::VectorXcd v(Eigen::Index(amps.size()));
  Eigen::Index i = 0;
  for (auto a : amps) v[i++] = a;
  return v;
}

double fidelity(const CMatrix& rho, const Eigen::VectorXcd& psi) {
  return (psi.adjoint() * rho * psi)(0, 0).real() / psi.squaredNorm();
}

}  // namespace

TEST(Rotation, ReferenceStates) {
  const Complex i(0, 1);
  QubitRegister r({"A"});
  r.pump("A");
  r.rotate("A", kPi, 0);
  EXPECT_NEAR(fidelity(r.density(), ket({1, 0})), 1.0, 1e-12);

  r.pump("A");
  r.rotate("A", kPi / 2, 0);
  EXPECT_NEAR(fidelity(r.density(), ket({-i, 1})), 1.0, 1e-12);

  r.pump("A");
  r.rotate("A", kPi / 2, kPi / 2);
  EXPECT_NEAR(fidelity(r.density(), ket({-1, 1})), 1.0, 1e-12);
}

TEST(Rotation, UnitaryAndNormPreserving) {
  QubitRegister r({"A", "B", "C"});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  const char* names[] = {"A", "B", "C"};
  for (int k = 0; k < 50; ++k) {
    r.rotate(names[k % 3], u(rng), u(rng));
    r.precess(names[(k + 1) % 3], u(rng));
  }
  EXPECT_NEAR(r.trace(), 1.0, 1e-12);
  const double purity = (r.density() * r.density()).trace().real();
  EXPECT_NEAR(purity, 1.0, 1e-12);
  EXPECT_THROW(r.rotate("D", 1, 0), ConfigError);
}

TEST(Rotation, CorrectedAnalysisPhaseUndoesPrecession) {
  for (double acc : {0.3, -2.0, 5.1}) {
    for (double a : {0.0, kPi / 2, 1.1}) {
      const CMatrix2 lhs = rotation(kPi / 2, corrected_phase(a, acc)) * precession(acc);
      const CMatrix2 rhs = precession(acc) * rotation(kPi / 2, a);
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(Register, PumpDephaseDepolarize) {
  QubitRegister r({"A", "B"});
  r.pump("B");
  EXPECT_NEAR(r.probabilities()[1], 1.0, 1e-15);  // |down, up>
  r.rotate("A", kPi / 2, 0);
  r.dephase("A");
  EXPECT_NEAR(std::abs(r.density()(1, 3)), 0.0, 1e-15);
  EXPECT_NEAR(r.probabilities()[3], 0.5, 1e-12);
  r.depolarize("B", 1.0);
  EXPECT_NEAR(r.probabilities()[0] + r.probabilities()[2], 0.5, 1e-12);
  EXPECT_NEAR(r.trace(), 1.0, 1e-12);
}

TEST(Phase, ParkedAtLizIsZero) {
  FieldMap f;
  PositionHistory h;
  h.hold(0, 100, 0.0);
  EXPECT_EQ(accumulate_phase(h, f, 0, 100), 0.0);
}

TEST(Phase, FixedPositionIsLinearInTime) {
  FieldMap f(0.0, 3e-11, 2e-15);
  PositionHistory h;
  h.hold(0, 500, 600.0);
  const double db = 3e-11 * 600 + 2e-15 * 600 * 600;
  for (double t : {10.0, 100.0, 500.0})
    EXPECT_NEAR(accumulate_phase(h, f, 0, t), units::kZeemanRate * db * t, 1e-12);
}

TEST(Phase, PiecewiseConstantExact) {
  FieldMap f(0.0, [](double x) { return 1e-10 * std::sin(x / 300.0); });
  PositionHistory h;
  const double xs[] = {0, 200, 400, 800, -200};
  const double ts[] = {0, 3, 10, 11.5, 40, 41};
  double exact = 0;
  for (int k = 0; k < 5; ++k) {
    h.hold(ts[k], ts[k + 1], xs[k]);
    exact += f.delta_b(xs[k]) * (ts[k + 1] - ts[k]);
  }
  exact *= units::kZeemanRate;
  EXPECT_NEAR(accumulate_phase(h, f, 0, 41), exact, 1e-10 * std::abs(exact));
}

TEST(Phase, LinearMotionInQuadraticFieldIsExact) {
  const double g1 = 4e-11, g2 = 3e-15;
  FieldMap f(0.0, g1, g2);
  PositionHistory h;
  h.add(0, 28, 0, 200);
  // integral of g1 v t + g2 v^2 t^2 over [0, T] with v = 200/28
  const double v = 200.0 / 28.0, T = 28.0;
  const double exact = units::kZeemanRate * (g1 * v * T * T / 2 + g2 * v * v * T * T * T / 3);
  EXPECT_NEAR(accumulate_phase(h, f, 0, T, 1), exact, 1e-12 * exact);
}

TEST(Phase, AdditiveAndGapDetected) {
  FieldMap f;
  PositionHistory h;
  h.add(0, 28, 0, 200);
  h.hold(28, 100, 200);
  h.add(100, 128, 200, 0);
  const double whole = accumulate_phase(h, f, 0, 128);
  const double parts = accumulate_phase(h, f, 0, 50) + accumulate_phase(h, f, 50, 128);
  EXPECT_NEAR(whole, parts, 1e-10 * std::abs(whole));
  PositionHistory gap;
  gap.hold(0, 10, 0);
  gap.hold(12, 20, 0);
  EXPECT_THROW(accumulate_phase(gap, f, 0, 20), PhysicsError);
  EXPECT_THROW(accumulate_phase(gap, f, 0, 25), PhysicsError);
  EXPECT_NO_THROW(accumulate_phase(gap, f, 12, 20));
}

TEST(FieldMap, ZeroAtLiz) {
  FieldMap f(150.0, [](double x) { return 1e-9 + 1e-12 * x; });
  EXPECT_EQ(f.delta_b(150.0), 0.0);
  EXPECT_NEAR(f.delta_b(250.0), 1e-10, 1e-22);
}

TEST(Readout, NoiselessUpUp) {
  QubitRegister r({"A", "B"});
  r.pump("A");
  r.pump("B");
  for (const auto& s : measure(r, {}, 100, 1)) EXPECT_EQ(s, "11");
}

TEST(Readout, SingleIonErrorRate) {
  QubitRegister r({"A"});
  r.pump("A");
  ReadoutModel m;
  m.uniform = {0.02, 0.02};
  auto counts = measure_counts(r, m, 100000, 11);
  const double dark = double(counts[0]) / 1e5;
  EXPECT_NEAR(dark, 0.02, 0.002);
  auto shots = measure(r, m, 100000, 12);
  const double dark2 = double(std::count(shots.begin(), shots.end(), "0")) / 1e5;
  EXPECT_NEAR(dark2, 0.02, 0.002);
}

TEST(Readout, EntangledStateStructure) {
  QubitRegister r({"A", "B"});
  r.set_pure(ket({0, 1, 1, 0}));
  auto counts = measure_counts(r, {}, 100000, 5);
  EXPECT_EQ(counts[0], 0u);
  EXPECT_EQ(counts[3], 0u);
  EXPECT_NEAR(double(counts[1]) / 1e5, 0.5, 4 * std::sqrt(0.25 / 1e5));
}

TEST(Readout, BornRuleAndDeterminism) {
  QubitRegister r({"A", "B", "C"});
  r.rotate("A", 1.0, 0.2);
  r.rotate("B", 2.1, -0.7);
  r.rotate("C", 0.4, 1.3);
  const auto p = r.probabilities();
  const std::size_t n = 100000;
  auto counts = measure_counts(r, {}, n, 99);
  for (std::size_t i = 0; i < p.size(); ++i)
    EXPECT_NEAR(double(counts[i]) / n, p[i], 4 * std::sqrt(p[i] * (1 - p[i]) / n) + 1e-12);
  EXPECT_EQ(counts, measure_counts(r, {}, n, 99));
  EXPECT_NE(counts, measure_counts(r, {}, n, 100));
}

TEST(Readout, ConfusionColumnsSumToOne) {
  ReadoutModel m;
  m.uniform = {0.03, 0.01};
  m.per_ion["B"] = {0.2, 0.1};
  for (const char* l : {"A", "B"}) {
    auto c = m.confusion(l);
    EXPECT_NEAR(c.col(0).sum(), 1.0, 1e-15);
    EXPECT_NEAR(c.col(1).sum(), 1.0, 1e-15);
  }
  m.uniform.up = 0.6;
  EXPECT_THROW(m.validate(), ConfigError);
}

TEST(LineFit, KnownLineAndErrorScaling) {
  std::vector<double> t{1, 2, 3, 4, 5}, y, s(5, 0.1);
  for (double v : t) y.push_back(2.5 * v - 1.0);
  auto f = weighted_line_fit(t, y, s);
  EXPECT_NEAR(f.slope, 2.5, 1e-12);
  EXPECT_NEAR(f.intercept, -1.0, 1e-12);
  // Oracle: sigma_slope = sigma / sqrt(sum (t - mean)^2) = 0.1 / sqrt(10).
  EXPECT_NEAR(f.slope_sigma, 0.1 / std::sqrt(10.0), 1e-12);
  std::vector<double> t2;
  for (double v : t) t2.push_back(2 * v);
  EXPECT_NEAR(weighted_line_fit(t2, y, s).slope_sigma, 0.5 * f.slope_sigma, 1e-12);
  EXPECT_THROW(weighted_line_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2},
                                 std::vector<double>{1, 1}),
               FitError);
}

namespace {

// Exact echo sequence on a register, sampled with binomial shots.
EchoProbe register_probe(const FieldMap& field, double transit_phase) {
  return [field, transit_phase](double x, double hold, std::size_t shots, std::uint64_t seed) {
    std::array<std::uint64_t, 2> out{};
    const double phi = transit_phase + units::kZeemanRate * field.delta_b(x) * hold;
    for (int k = 0; k < 2; ++k) {
      QubitRegister r({"A"});
      r.pump("A");
      r.rotate("A", kPi / 2, 0);
      r.precess("A", phi);
      r.rotate("A", kPi, 0);
      r.rotate("A", kPi / 2, k * kPi / 2);
      out[k] = measure_counts(r, {}, shots, seed + k)[1];
    }
    return out;
  };
}

}  // namespace

TEST(EchoPhase, RecoversAccumulatedPhase) {
  for (double phi : {0.2, 1.9, -2.5, 3.0}) {
    QubitRegister r({"A"});
    std::array<std::uint64_t, 2> counts{};
    const std::size_t n = 1000000000;
    for (int k = 0; k < 2; ++k) {
      r.pump("A");
      r.rotate("A", kPi / 2, 0);
      r.precess("A", phi);
      r.rotate("A", kPi, 0);
      r.rotate("A", kPi / 2, k * kPi / 2);
      counts[k] = std::uint64_t(std::llround(r.probabilities()[1] * double(n)));
    }
    EXPECT_NEAR(echo_phase(counts, n).phase, phi, 1e-6);
  }
}

TEST(FieldScan, RecoversInjectedGradient) {
  FieldMap field(0.0, 6e-11, 0.0);
  const std::vector<double> xs{-400, -200, 200, 400, 600};
  const std::vector<double> holds{0, 50, 100, 150, 200};
  auto est = ramsey_field_scan(register_probe(field, 0.4), xs, holds, 2000, 42);
  ASSERT_EQ(est.size(), xs.size());
  for (const auto& e : est) {
    EXPECT_LT(std::abs(e.delta_b - field.delta_b(e.x)), 3 * e.sigma) << e.x;
    EXPECT_NEAR(e.phi0, 0.4, 4 * e.phi0_sigma);
  }
}

TEST(FieldScan, ZeroFieldSlopesConsistentWithZero) {
  FieldMap field(0.0, 0.0, 0.0);
  const std::vector<double> xs{-200, 200};
  const std::vector<double> holds{0, 100, 200};
  for (const auto& e : ramsey_field_scan(register_probe(field, 1.0), xs, holds, 2000, 7))
    EXPECT_LT(std::abs(e.delta_b), 4 * e.sigma);
  EXPECT_THROW(ramsey_field_scan(register_probe(field, 0.0), xs, std::vector<double>{0, 1}, 10, 1),
               FitError);
}

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

#include <numbers>

#include "ionswap/errors.hpp"
#include "ionswap/sequence.hpp"

namespace ionswap {

namespace {

constexpr double kPi = std::numbers::pi;

struct Pulse {
  double theta, phi;
};

// Same pulses as tomography's preparation_pulse / analysis_pulse.
Pulse prep_pulse(int k) {
  switch (k) {
    case 0: return {0, 0};
    case 1: return {kPi / 2, 0};
    case 2: return {kPi / 2, kPi / 2};
    case 3: return {kPi, 0};
    default: throw ConfigError("preparation index must be 0..3");
  }
}

Pulse analysis_pulse_angles(int k) {
  if (k == 3) throw ConfigError("analysis index must be 0..2");
  return prep_pulse(k);
}

}  // namespace

Sequence build_swap_tomography(int prep_a, int prep_b, int analysis_left, int analysis_right,
                               const SwapTomographyLayout& layout) {
  const Pulse pa = prep_pulse(prep_a), pb = prep_pulse(prep_b);
  const Pulse al = analysis_pulse_angles(analysis_left), ar = analysis_pulse_angles(analysis_right);
  const int s = layout.site, l = s - 1, r = s + 1;
  const std::string left_after = layout.include_swap ? "B" : "A";
  const std::string right_after = layout.include_swap ? "A" : "B";

  Sequence q;
  q.name = layout.include_swap ? "swap-tomography" : "identity-tomography";
  q.initial = {{s, {"A", "B"}}};
  q.add(Primitive::pump({"A", "B"}));
  q.add(Primitive::separate(s));
  // Parking one segment further out keeps a visitor at the site clear of its partner.
  const int lp = l - 1, rp = r + 1;
  const auto park = [&] {
    q.add(Primitive::transport(l, lp));
    q.add(Primitive::transport(r, rp));
  };
  const auto unpark = [&] {
    q.add(Primitive::transport(lp, l));
    q.add(Primitive::transport(rp, r));
  };
  park();
  auto visit = [&](int home, const std::string& ion, Primitive laser) {
    q.add(Primitive::transport(home, s, ion));
    laser.ions = {ion};
    q.add(std::move(laser));
    q.add(Primitive::transport(s, home, ion));
  };
  visit(lp, "A", Primitive::rotate("A", pa.theta, pa.phi));
  visit(rp, "B", Primitive::rotate("B", pb.theta, pb.phi));
  unpark();
  q.add(Primitive::merge(s));
  if (layout.include_swap) q.add(Primitive::swap(s));
  q.add(Primitive::separate(s));
  park();
  visit(lp, left_after, Primitive::rotate(left_after, al.theta, al.phi));
  visit(rp, right_after, Primitive::rotate(right_after, ar.theta, ar.phi));
  unpark();
  q.add(Primitive::merge(s));
  q.add(Primitive::shelve({left_after, right_after}));
  q.add(Primitive::separate(s));
  park();
  q.add(Primitive::transport(lp, s, left_after));
  q.add(Primitive::readout({left_after}));
  q.add(Primitive::transport(s, lp, left_after));
  q.add(Primitive::transport(rp, s, right_after));
  q.add(Primitive::readout({right_after}));
  return q;
}

Sequence build_three_ion_reorder(const std::string& input_bits, const ReorderLayout& layout) {
  if (input_bits.size() != 3 || input_bits.find_first_not_of("01") != std::string::npos)
    throw ConfigError("three-ion input must be three characters of 0/1");
  const int z = layout.liz, L = layout.left_store, M = layout.middle_store, R = layout.right_store;
  const auto loading = SequencePhase::loading;

  Sequence q;
  q.name = "three-ion-reorder-" + input_bits;
  q.initial = {{z, {"A", "B", "C"}}};

  // Split the loaded crystal: AB | C, park C, then split AB.
  q.add(Primitive::separate(z, 2, layout.loading_bias), loading);
  q.add(Primitive::transport(z + 1, M, "C"), loading);
  q.add(Primitive::transport(z - 1, z, "AB"), loading);
  q.add(Primitive::separate(z), loading);

  const auto prepare = [&](const std::string& ion) {
    q.add(Primitive::pump({ion}));
    const char bit = input_bits[std::size_t(ion[0] - 'A')];
    q.add(Primitive::rotate(ion, bit == '1' ? 0.0 : kPi, 0));
  };
  const auto block = [&] {
    q.add(Primitive::merge(z));
    q.add(Primitive::swap(z));
    q.add(Primitive::separate(z));
  };
  const auto step = [&](int from, int to, const char* ion) { q.add(Primitive::transport(from, to, ion)); };

  // Initialisation round: every ion visits the LIZ once.
  step(M, R, "C");
  step(z + 1, M, "B");
  step(z - 1, z, "A");
  prepare("A");
  step(z, L, "A");
  step(M, z, "B");
  prepare("B");
  step(z, z - 1, "B");
  step(R, z, "C");
  prepare("C");
  step(z, M, "C");
  step(z - 1, z + 1, "B");
  step(L, z - 1, "A");
  block();  // AB -> BA

  step(z - 1, L, "B");
  step(z + 1, z - 1, "A");
  step(M, z + 1, "C");
  block();  // AC -> CA

  step(z + 1, M, "A");
  step(z - 1, z + 1, "C");
  step(L, z - 1, "B");
  block();  // BC -> CB

  // Shelving round.
  step(M, R, "A");
  step(z + 1, M, "B");
  step(z - 1, z, "C");
  q.add(Primitive::shelve({"C"}));
  step(z, L, "C");
  step(M, z, "B");
  q.add(Primitive::shelve({"B"}));
  step(z, z - 1, "B");
  step(R, z, "A");
  q.add(Primitive::shelve({"A"}));
  step(z, R, "A");

  // Readout round.
  step(z - 1, z, "B");
  q.add(Primitive::readout({"B"}));
  step(z, M, "B");
  step(L, z, "C");
  q.add(Primitive::readout({"C"}));
  step(z, L, "C");
  step(M, z - 1, "B");
  step(R, z, "A");
  q.add(Primitive::readout({"A"}));
  return q;
}

Sequence build_echo_probe(int segment, double hold_us, double analysis_phase, int liz) {
  if (!(hold_us >= 0)) throw ConfigError("hold must be >= 0");
  Sequence q;
  q.name = "echo-probe";
  q.initial = {{liz, {"A"}}};
  q.add(Primitive::pump({"A"}));
  q.add(Primitive::rotate("A", kPi / 2, 0, false));
  if (segment != liz) q.add(Primitive::transport(liz, segment, "A"));
  q.add(Primitive::hold(hold_us));
  if (segment != liz) q.add(Primitive::transport(segment, liz, "A"));
  q.add(Primitive::rotate("A", kPi, 0, false));
  q.add(Primitive::rotate("A", kPi / 2, analysis_phase, false));
  q.add(Primitive::shelve({"A"}));
  q.add(Primitive::readout({"A"}));
  return q;
}

}  // namespace ionswap

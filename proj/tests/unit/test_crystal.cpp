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
#include <sstream>

#include "ionswap/crystal.hpp"
#include "ionswap/errors.hpp"

using namespace ionswap;

namespace {

const TrapGeometry& calibrated() {
  static const TrapGeometry g = calibrate({});
  return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Two-ion spacing in a harmonic well from SI constants: d^3 = e^2 / (2 pi eps0 m w^2).
double two_ion_spacing_um(double axial_mhz) {
  const double e = 1.602176634e-19, eps0 = 8.8541878128e-12, amu = 1.66053906660e-27;
  const double w = 2 * std::numbers::pi * axial_mhz * 1e6;
  return std::cbrt(e * e / (2 * std::numbers::pi * eps0 * 40 * amu * w * w)) * 1e6;
}

}  // namespace

TEST(CrystalState, RejectsCoincidentIons) {
  EXPECT_THROW(CrystalState({Vec3::Zero(), Vec3(0.05, 0, 0)}), ConfigError);
  EXPECT_THROW(CrystalState(std::vector<Vec3>(4, Vec3::Zero())), ConfigError);
  EXPECT_NO_THROW(CrystalState({Vec3::Zero(), Vec3(0.2, 0, 0)}));
}

TEST(Units, HbarInInternalUnits) {
  // hbar / u in um^2/us.
  EXPECT_NEAR(units::kHbar, 1.054571817e-34 / 1.66053906660e-27 * 1e6, 1e-12);
  EXPECT_NEAR(units::kHbar, 0.0635078, 1e-6);
}

TEST(Equilibrium, TwoIonSpacingInHarmonicWell) {
  auto well = HarmonicPotential::from_frequencies(Vec3(1.488, 1.927, 3.248));
  auto eq = find_equilibrium(well, {Vec3(-3, 0, 0), Vec3(2, 0, 0)});
  const double d = (eq[1] - eq[0]).norm();
  EXPECT_NEAR(d, two_ion_spacing_um(1.488), 1e-9);
  EXPECT_NEAR(d, 4.3, 0.05);
  EXPECT_LT(crystal_gradient(well, eq).norm(), 1e-10);
}

TEST(Equilibrium, SingleIonAtPotentialMinimum) {
  TrapModel m(calibrated());
  ElectrodePotential field(m, m.dense(single_well(22, -6.0)));
  auto eq = find_equilibrium(field, {Vec3(410, 0.3, -0.2)});
  EXPECT_NEAR(eq[0].x(), 400.0, 1e-8);
  EXPECT_NEAR(eq[0].y(), 0.0, 1e-10);
}

TEST(Equilibrium, VerticalAlignmentAboveTransition) {
  auto well = HarmonicPotential::from_frequencies(Vec3(2.2, 1.927, 3.248));
  auto eq = find_equilibrium(well, {Vec3(-2, 0.3, 0), Vec3(2, -0.2, 0)});
  EXPECT_LT(std::abs(eq[0].x() - eq[1].x()), 1e-8);
  EXPECT_GT(std::abs(eq[0].y() - eq[1].y()), 3.0);
}

TEST(Equilibrium, SaddleIsReported) {
  auto well = HarmonicPotential::from_frequencies(Vec3(2.2, 1.927, 3.248));
  EXPECT_THROW(find_equilibrium(well, {Vec3(-2, 0, 0), Vec3(2, 0, 0)}), UnstableError);
}

TEST(NormalModes, HarmonicTwoIonFormulas) {
  const double fz = 1.488, fl = 1.927, fh = 3.248;
  auto well = HarmonicPotential::from_frequencies(Vec3(fz, fl, fh));
  auto modes = normal_modes(well, find_equilibrium(well, {Vec3(-2, 0, 0), Vec3(2, 0, 0)}));
  ASSERT_EQ(modes.modes.size(), 6u);
  EXPECT_LT(rel(modes.mode("axial-COM").mhz, fz), 1e-9);
  EXPECT_LT(rel(modes.mode("axial-stretch").mhz, std::sqrt(3.0) * fz), 1e-9);
  EXPECT_LT(rel(modes.mode("radial-COM-low").mhz, fl), 1e-9);
  EXPECT_LT(rel(modes.mode("radial-COM-high").mhz, fh), 1e-9);
  EXPECT_LT(rel(modes.mode("radial-rocking-low").mhz, std::sqrt(fl * fl - fz * fz)), 1e-9);
  EXPECT_LT(rel(modes.mode("radial-rocking-high").mhz, std::sqrt(fh * fh - fz * fz)), 1e-9);
  const Eigen::MatrixXd e = modes.eigenvectors();
  EXPECT_LT((e.transpose() * e - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NormalModes, CalibratedSurrogateCloseToHarmonic) {
  TrapModel m(calibrated());
  ElectrodePotential field(m, m.dense(single_well(20, -6.0)));
  auto modes = normal_modes(field, find_equilibrium(field, linear_guess(field, 2, 0.0)));
  // Gaussian anharmonicity over the 4.3 um crystal shifts modes by a few 1e-4.
  EXPECT_LT(rel(modes.mode("axial-stretch").mhz, std::sqrt(3.0) * 1.488), 5e-4);
  EXPECT_LT(rel(modes.mode("radial-rocking-low").mhz, std::sqrt(1.927 * 1.927 - 1.488 * 1.488)), 5e-4);
  EXPECT_LT(rel(modes.mode("radial-COM-low").mhz, 1.927), 1e-9);
}

TEST(NormalModes, SingleIonMatchesSecularFrequencies) {
  TrapModel m(calibrated());
  const auto v = m.dense(single_well(20, -6.0));
  ElectrodePotential field(m, v);
  auto modes = normal_modes(field, find_equilibrium(field, {Vec3::Zero()}));
  auto f = single_ion_frequencies(m, v, Vec3::Zero());
  EXPECT_NEAR(modes.mode("axial").mhz, f.axial_mhz, 1e-9);
  EXPECT_NEAR(modes.mode("radial-low").mhz, f.radial_low_mhz, 1e-9);
  EXPECT_NEAR(modes.mode("radial-high").mhz, f.radial_high_mhz, 1e-9);
}

TEST(NormalModes, IndependentOfIonOrder) {
  TrapModel m(calibrated());
  // Shallow enough for a linear three-ion chain.
  ElectrodePotential field(m, m.dense(single_well(20, -3.0)));
  auto eq = find_equilibrium(field, linear_guess(field, 3, 0.0));
  auto a = normal_modes(field, eq);
  std::swap(eq[0], eq[2]);
  auto b = normal_modes(field, eq);
  for (std::size_t k = 0; k < a.modes.size(); ++k) {
    EXPECT_NEAR(a.modes[k].mhz, b.modes[k].mhz, 1e-10);
    EXPECT_EQ(a.modes[k].label, b.modes[k].label);
  }
  EXPECT_NO_THROW(a.mode("axial-egyptian"));
  EXPECT_NO_THROW(a.mode("radial-zigzag-low"));
}

TEST(NormalModes, UnstableConfigurationThrows) {
  auto well = HarmonicPotential::from_frequencies(Vec3(2.2, 1.927, 3.248));
  const double h = 0.5 * two_ion_spacing_um(2.2);
  EXPECT_THROW(normal_modes(well, {Vec3(-h, 0, 0), Vec3(h, 0, 0)}), UnstableError);
}

TEST(Forces, CoulombPairIsEqualAndOpposite) {
  HarmonicPotential free(Vec3::Zero(), Mat3::Zero());
  std::vector<Vec3> r{Vec3(0.3, -1.2, 0.7), Vec3(4.1, 0.5, -0.9), Vec3(-2, 3, 1)};
  const Eigen::VectorXd g = crystal_gradient(free, r);
  Vec3 total = Vec3::Zero();
  for (int i = 0; i < 3; ++i) total += g.segment<3>(3 * i);
  EXPECT_LT(total.norm(), 1e-12 * g.norm());
}

TEST(Integrate, SingleIonOscillationFrequency) {
  TrapModel m(calibrated());
  const auto v = m.dense(single_well(20, -6.0));
  ElectrodePotential field(m, v);
  const double f = normal_modes(field, {Vec3::Zero()}).mode("axial").mhz;
  IntegrationOptions o;
  o.stride = 1;
  auto tr = integrate(m, static_voltages(v), CrystalState({Vec3(0.1, 0, 0)}), 0, 20.0, o);
  std::vector<double> crossings;
  for (std::size_t k = 1; k < tr.times.size(); ++k) {
    const double a = tr.positions[k - 1][0].x(), b = tr.positions[k][0].x();
    if ((a < 0) != (b < 0)) crossings.push_back(tr.times[k - 1] + (tr.times[k] - tr.times[k - 1]) * a / (a - b));
  }
  ASSERT_GT(crossings.size(), 20u);
  const double period = 2 * (crossings.back() - crossings.front()) / double(crossings.size() - 1);
  EXPECT_LT(rel(1.0 / period, f), 1e-3);
}

TEST(Integrate, EscapeReportsTime) {
  TrapModel m(calibrated());
  CrystalState s({Vec3::Zero()}, {Vec3(0, 0, 5000.0)});
  try {
    integrate(m, static_voltages(m.dense(single_well(20, -6.0))), s, 0, 5.0);
    FAIL() << "expected escape";
  } catch (const EscapeError& e) {
    EXPECT_GT(e.time_us(), 0.0);
    EXPECT_LT(e.time_us(), 5.0);
  }
}

TEST(Integrate, StrideAndCsv) {
  TrapModel m(calibrated());
  IntegrationOptions o;
  o.stride = 100;
  auto tr = integrate(m, static_voltages(m.dense(single_well(20, -6.0))),
                      CrystalState({Vec3(-2, 0, 0), Vec3(2, 0, 0)}), 0, 1.0, o);
  EXPECT_EQ(tr.times.size(), 6u);
  EXPECT_DOUBLE_EQ(tr.times.back(), 1.0);
  std::ostringstream csv;
  write_csv(csv, tr);
  EXPECT_EQ(csv.str().substr(0, 22), "t_us,x0,y0,z0,x1,y1,z1");
}

TEST(Excitation, RestIsZeroAndZpfDisplacementIsOne) {
  TrapModel m(calibrated());
  ElectrodePotential field(m, m.dense(single_well(20, -6.0)));
  auto modes = normal_modes(field, find_equilibrium(field, linear_guess(field, 2, 0.0)));
  for (const auto& e : mode_excitation(rest_state(modes), modes).modes) EXPECT_EQ(e.nbar, 0.0);
  for (std::size_t k = 0; k < modes.modes.size(); ++k) {
    const double w = units::angular(modes.modes[k].mhz);
    const double q_zpf = std::sqrt(units::kHbar / (2 * w));
    CrystalState s = rest_state(modes);
    for (int i = 0; i < 2; ++i)
      s.positions[i] += 2 * q_zpf * modes.modes[k].vector.segment<3>(3 * i) / std::sqrt(modes.mass);
    auto rep = mode_excitation(s, modes);
    for (std::size_t j = 0; j < modes.modes.size(); ++j)
      EXPECT_NEAR(rep.modes[j].nbar, j == k ? 1.0 : 0.0, 1e-9);
  }
}

TEST(Excitation, NbarEqualsEnergyOverHbarOmega) {
  // Single ion in a harmonic well: the energy is exactly quadratic.
  auto well = HarmonicPotential::from_frequencies(Vec3(1.488, 1.927, 3.248));
  auto modes = normal_modes(well, {Vec3::Zero()});
  CrystalState s({Vec3(0.013, 0, 0)}, {Vec3(0.05, 0, 0)});
  auto rep = mode_excitation(s, modes);
  const double w = units::angular(1.488);
  const double e = total_energy(well, s) - crystal_energy(well, modes.equilibrium);
  EXPECT_LT(rel(rep.mode("axial").nbar, e / (units::kHbar * w)), 1e-8);
  // Two ions, velocity-only excitation of the stretch mode.
  auto m2 = normal_modes(well, find_equilibrium(well, {Vec3(-2, 0, 0), Vec3(2, 0, 0)}));
  CrystalState s2 = rest_state(m2);
  const auto& st = m2.mode("axial-stretch");
  for (int i = 0; i < 2; ++i) s2.velocities[i] = 0.02 * st.vector.segment<3>(3 * i);
  const double kinetic = 0.5 * 40 * (s2.velocities[0].squaredNorm() + s2.velocities[1].squaredNorm());
  EXPECT_LT(rel(mode_excitation(s2, m2).mode("axial-stretch").nbar,
                kinetic / (units::kHbar * units::angular(st.mhz))), 1e-10);
}

TEST(Excitation, ThermalSamplingMean) {
  auto well = HarmonicPotential::from_frequencies(Vec3(1.488, 1.927, 3.248));
  auto modes = normal_modes(well, find_equilibrium(well, {Vec3(-2, 0, 0), Vec3(2, 0, 0)}));
  std::vector<double> target{0.5, 1, 2, 3, 4, 5};
  std::mt19937_64 rng(7);
  std::vector<double> mean(6, 0.0);
  const int samples = 20000;
  for (int k = 0; k < samples; ++k) {
    auto rep = mode_excitation(thermal_state(modes, target, rng), modes);
    for (int j = 0; j < 6; ++j) mean[j] += rep.modes[j].nbar / samples;
  }
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(mean[j], target[j], 0.05 * target[j]);
}

TEST(Swap, ZeroDiagonalKeepsSymmetry) {
  TrapModel m(calibrated());
  SwapRampParams p;
  p.u_d_peak = 0.0;
  auto sim = simulate_swap(m, p);
  EXPECT_LT(sim.max_radial, 1e-6);
  EXPECT_FALSE(sim.swapped);
}

TEST(Swap, DefaultRampExchangesIonsAdiabatically) {
  TrapModel m(calibrated());
  auto sim = simulate_swap(m, {});
  EXPECT_TRUE(sim.swapped);
  EXPECT_LT(sim.excitation.max_nbar(), 0.05);
  EXPECT_EQ(sim.excitation.modes.size(), 6u);
  EXPECT_GT(sim.simulated_us, 22.0);
}

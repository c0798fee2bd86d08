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

#include "ionswap/errors.hpp"
#include "ionswap/trap_model.hpp"
#include "ionswap/units.hpp"

using namespace ionswap;

namespace {

// Central differences of the potential; independent of the analytic derivatives.
Mat3 numeric_hessian(const TrapModel& m, const ElectrodeVoltages& v, const Vec3& r, double h) {
  Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Vec3 a = r, b = r, c = r, d = r;
      a[i] += h; a[j] += h;
      b[i] += h; b[j] -= h;
      c[i] -= h; c[j] += h;
      d[i] -= h; d[j] -= h;
      out(i, j) = (m.potential(v, a) - m.potential(v, b) - m.potential(v, c) + m.potential(v, d)) /
                  (4 * h * h);
    }
  return out;
}

double mhz_from_curvature(double k_v_per_um2, double mass) {
  return std::sqrt(k_v_per_um2 * units::kEvToInternal / mass) / units::kTwoPi;
}

}  // namespace

TEST(ChannelId, NameRoundTrip) {
  EXPECT_EQ(ChannelId::dc(20).name(), "dc20");
  EXPECT_EQ(ChannelId::diagonal(7).name(), "diag7");
  EXPECT_EQ(ChannelId::parse("diag21"), ChannelId::diagonal(21));
  EXPECT_EQ(ChannelId::parse("dc14"), ChannelId::dc(14));
  EXPECT_THROW(ChannelId::parse("rf3"), ConfigError);
}

TEST(TrapModel, UnknownChannelRejected) {
  TrapModel m({});
  EXPECT_THROW(m.dense({{ChannelId::dc(31), -1.0}}), ConfigError);
  EXPECT_THROW(m.dense({{ChannelId::diagonal(2), 1.0}}), ConfigError);
}

TEST(TrapModel, GradientAndHessianMatchFiniteDifferences) {
  TrapGeometry g;
  g.diagonal_coupling = 3e-5;
  TrapModel m(g);
  auto v = m.dense({{ChannelId::dc(20), -7.0}, {ChannelId::dc(21), 2.0},
                    {ChannelId::diagonal(20), 1.3}, {ChannelId::diagonal(22), -0.4}});
  for (Vec3 r : {Vec3(0, 0, 0), Vec3(37, 4, -2), Vec3(-150, -6, 3), Vec3(260, 1, 1)}) {
    const Vec3 grad = m.gradient(v, r);
    for (int i = 0; i < 3; ++i) {
      Vec3 a = r, b = r;
      a[i] += 1e-3;
      b[i] -= 1e-3;
      const double fd = (m.potential(v, a) - m.potential(v, b)) / 2e-3;
      EXPECT_NEAR(grad[i], fd, 1e-8 + 1e-6 * std::abs(fd));
    }
    const Mat3 h = m.hessian(v, r);
    const Mat3 fd = numeric_hessian(m, v, r, 0.05);
    EXPECT_LT((h - fd).cwiseAbs().maxCoeff(), 1e-8) << r.transpose();
  }
}

TEST(TrapModel, SingleWellHasMinimumAtSegmentCentre) {
  TrapModel m({});
  for (int s : {15, 20, 27}) {
    auto f = single_ion_frequencies(m, m.dense(single_well(s, -6.0)), Vec3(m.geometry().center(s) + 30, 1, 1));
    EXPECT_NEAR(f.equilibrium.x(), m.geometry().center(s), 1e-6);
    EXPECT_NEAR(f.equilibrium.y(), 0.0, 1e-9);
  }
}

TEST(Calibration, ReproducesTargetFrequencies) {
  const CalibrationTargets targets;
  const TrapGeometry g = calibrate(targets);
  TrapModel m(g);
  auto f = single_ion_frequencies(m, m.dense(single_well(g.liz_segment, targets.u_c)), Vec3::Zero());
  EXPECT_NEAR(f.axial_mhz, 1.488, 1e-6);
  EXPECT_NEAR(f.radial_low_mhz, 1.927, 1e-6);
  EXPECT_NEAR(f.radial_high_mhz, 3.248, 1e-6);
  // Radial curvatures follow from the harmonic relation directly.
  EXPECT_NEAR(mhz_from_curvature(g.kappa_z, g.ion_mass), 3.248, 1e-6);
}

TEST(Calibration, AxialFrequencyScalesAsSqrtDepth) {
  const TrapGeometry g = calibrate({});
  TrapModel m(g);
  auto f6 = single_ion_frequencies(m, m.dense(single_well(20, -6.0)), Vec3::Zero());
  auto f24 = single_ion_frequencies(m, m.dense(single_well(20, -24.0)), Vec3::Zero());
  EXPECT_NEAR(f24.axial_mhz / f6.axial_mhz, 2.0, 1e-6);
}

TEST(Calibration, UnreachableTargetThrows) {
  CalibrationTargets t;
  t.axial_mhz = 1e6;
  EXPECT_THROW(calibrate(t), CalibrationError);
  CalibrationTargets repulsive;
  repulsive.u_c = 6.0;
  EXPECT_THROW(calibrate(repulsive), ConfigError);
}

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

#pragma once

// Analytic surrogate for a segmented multilayer Paul trap. Each axial segment
// contributes a Gaussian bump along x; the radial confinement is a static
// harmonic pseudopotential; a diagonal electrode pair around a site adds an
// x*y quadrupole that breaks the y -> -y symmetry.

#include <Eigen/Dense>

#include <array>
#include <compare>
#include <map>
#include <string>
#include <vector>

namespace ionswap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class ChannelRole {
  kDc,        // segment DC voltage (trap / offset role depends on the waveform)
  kDiagonal,  // diagonal pair around a site: -U on the left pair, +U on the right pair
};

struct ChannelId {
  int segment = 0;
  ChannelRole role = ChannelRole::kDc;

  auto operator<=>(const ChannelId&) const = default;

  /// "dc20" or "diag20".
  std::string name() const;
  static ChannelId parse(const std::string& text);
  static ChannelId dc(int segment) { return {segment, ChannelRole::kDc}; }
  static ChannelId diagonal(int segment) { return {segment, ChannelRole::kDiagonal}; }
};

using VoltageAssignment = std::map<ChannelId, double>;

struct TrapGeometry {
  int first_segment = 14;
  int last_segment = 30;
  int liz_segment = 20;
  double spacing = 200.0;             // um
  double axial_width = 115.47005383792515;  // um, 200/sqrt(3)
  double coupling = 1.0;              // dimensionless segment efficiency
  double kappa_y = 6.0e-5;            // V/um^2, lower radial curvature
  double kappa_z = 1.7e-4;            // V/um^2
  double diagonal_coupling = 1.0e-5;  // 1/um^2
  double ion_mass = 40.0;             // u

  int segment_count() const { return last_segment - first_segment + 1; }
  bool has_segment(int segment) const {
    return segment >= first_segment && segment <= last_segment;
  }
  /// Axial position of a segment center, with the LIZ at x = 0.
  double center(int segment) const { return (segment - liz_segment) * spacing; }
  std::vector<double> segment_centers() const;
  /// Nearest segment to an axial position (clamped to the trap).
  int nearest_segment(double x) const;

  void validate() const;
};

/// Dense per-segment voltages; the fast representation used in force loops.
struct ElectrodeVoltages {
  std::vector<double> dc;
  std::vector<double> diagonal;
};

class TrapModel {
 public:
  explicit TrapModel(TrapGeometry geometry);

  const TrapGeometry& geometry() const { return geometry_; }

  ElectrodeVoltages zero_voltages() const;
  /// Throws ConfigError for channels outside the trap.
  ElectrodeVoltages dense(const VoltageAssignment& volts) const;

  double potential(const ElectrodeVoltages& v, const Vec3& r) const;
  Vec3 gradient(const ElectrodeVoltages& v, const Vec3& r) const;
  Mat3 hessian(const ElectrodeVoltages& v, const Vec3& r) const;

  double potential(const VoltageAssignment& v, const Vec3& r) const {
    return potential(dense(v), r);
  }

 private:
  TrapGeometry geometry_;
  double inv_w2_;
};

/// Single-charge potential energy per unit charge (V) at r.
double potential(const TrapGeometry& geometry, const VoltageAssignment& volts, const Vec3& r);

/// Static well: `u_c` on one segment, everything else grounded.
VoltageAssignment single_well(int segment, double u_c);

struct SecularFrequencies {
  Vec3 equilibrium;
  std::array<double, 3> mhz{};     // ascending
  std::array<Vec3, 3> axes;        // principal axes matching `mhz`
  double axial_mhz = 0;            // frequency of the axis with largest x component
  double radial_low_mhz = 0;
  double radial_high_mhz = 0;
};

/// Single-ion secular frequencies around the minimum nearest to `guess`.
SecularFrequencies single_ion_frequencies(const TrapModel& model, const ElectrodeVoltages& v,
                                          const Vec3& guess);

struct CalibrationTargets {
  double axial_mhz = 1.488;
  double radial_low_mhz = 1.927;
  double radial_high_mhz = 3.248;
  double u_c = -6.0;
};

/// Solves for segment coupling and radial curvatures so that one ion in a
/// well of depth `u_c` at the LIZ has the target secular frequencies.
TrapGeometry calibrate(const CalibrationTargets& targets, TrapGeometry base = {});

}  // namespace ionswap

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

#include "ionswap/trap_model.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "ionswap/errors.hpp"
#include "ionswap/units.hpp"

namespace ionswap {

namespace {

// Segments further than this many widths away contribute < 1e-30 V/V.
constexpr double kCutoffWidths = 12.0;

}  // namespace

std::string ChannelId::name() const {
  return (role == ChannelRole::kDc ? "dc" : "diag") + std::to_string(segment);
}

ChannelId ChannelId::parse(const std::string& text) {
  auto number = [&](std::size_t offset) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(text.substr(offset), &used);
    } catch (const std::exception&) {
      throw ConfigError("bad channel name '" + text + "'");
    }
    if (offset + used != text.size()) throw ConfigError("bad channel name '" + text + "'");
    return value;
  };
  if (text.rfind("diag", 0) == 0) return diagonal(number(4));
  if (text.rfind("dc", 0) == 0) return dc(number(2));
  throw ConfigError("bad channel name '" + text + "'");
}

std::vector<double> TrapGeometry::segment_centers() const {
  std::vector<double> out;
  out.reserve(segment_count());
  for (int s = first_segment; s <= last_segment; ++s) out.push_back(center(s));
  return out;
}

int TrapGeometry::nearest_segment(double x) const {
  int s = liz_segment + static_cast<int>(std::lround(x / spacing));
  return std::clamp(s, first_segment, last_segment);
}

void TrapGeometry::validate() const {
  if (last_segment < first_segment) throw ConfigError("trap has no segments");
  if (!has_segment(liz_segment)) throw ConfigError("LIZ segment outside the trap");
  if (!(spacing > 0) || !(axial_width > 0) || !(coupling > 0))
    throw ConfigError("spacing, axial width and coupling must be positive");
  if (!(kappa_y > 0) || !(kappa_z > 0)) throw ConfigError("radial curvatures must be positive");
  if (kappa_y == kappa_z) throw ConfigError("radial curvatures must differ");
  if (!(ion_mass > 0)) throw ConfigError("ion mass must be positive");
}

TrapModel::TrapModel(TrapGeometry geometry) : geometry_(geometry) {
  geometry_.validate();
  inv_w2_ = 1.0 / (geometry_.axial_width * geometry_.axial_width);
}

ElectrodeVoltages TrapModel::zero_voltages() const {
  const auto n = static_cast<std::size_t>(geometry_.segment_count());
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

ElectrodeVoltages TrapModel::dense(const VoltageAssignment& volts) const {
  ElectrodeVoltages out = zero_voltages();
  for (const auto& [id, value] : volts) {
    if (!geometry_.has_segment(id.segment))
      throw ConfigError("unknown channel " + id.name());
    auto i = static_cast<std::size_t>(id.segment - geometry_.first_segment);
    (id.role == ChannelRole::kDc ? out.dc : out.diagonal)[i] = value;
  }
  return out;
}

double TrapModel::potential(const ElectrodeVoltages& v, const Vec3& r) const {
  const auto& g = geometry_;
  const double reach = kCutoffWidths * g.axial_width;
  double axial = 0.0;
  double diag = 0.0;
  for (int k = 0; k < g.segment_count(); ++k) {
    const double xi = r.x() - g.center(g.first_segment + k);
    if (std::abs(xi) > reach) continue;
    const double e = std::exp(-0.5 * xi * xi * inv_w2_);
    axial += v.dc[k] * e;
    diag += v.diagonal[k] * e * xi;
  }
  return g.coupling * axial + 0.5 * g.kappa_y * r.y() * r.y() + 0.5 * g.kappa_z * r.z() * r.z() +
         g.diagonal_coupling * diag * r.y();
}

Vec3 TrapModel::gradient(const ElectrodeVoltages& v, const Vec3& r) const {
  const auto& g = geometry_;
  const double reach = kCutoffWidths * g.axial_width;
  double gx = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  for (int k = 0; k < g.segment_count(); ++k) {
    const double xi = r.x() - g.center(g.first_segment + k);
    if (std::abs(xi) > reach) continue;
    const double e = std::exp(-0.5 * xi * xi * inv_w2_);
    gx -= v.dc[k] * e * xi * inv_w2_;
    dx += v.diagonal[k] * e * (1.0 - xi * xi * inv_w2_);
    dy += v.diagonal[k] * e * xi;
  }
  const double cd = g.diagonal_coupling;
  return {g.coupling * gx + cd * dx * r.y(), g.kappa_y * r.y() + cd * dy, g.kappa_z * r.z()};
}

Mat3 TrapModel::hessian(const ElectrodeVoltages& v, const Vec3& r) const {
  const auto& g = geometry_;
  const double reach = kCutoffWidths * g.axial_width;
  double hxx = 0.0;
  double dxx = 0.0;
  double dxy = 0.0;
  for (int k = 0; k < g.segment_count(); ++k) {
    const double xi = r.x() - g.center(g.first_segment + k);
    if (std::abs(xi) > reach) continue;
    const double a = xi * xi * inv_w2_;
    const double e = std::exp(-0.5 * a);
    hxx += v.dc[k] * e * (a - 1.0) * inv_w2_;
    dxx -= v.diagonal[k] * e * xi * inv_w2_ * (3.0 - a);
    dxy += v.diagonal[k] * e * (1.0 - a);
  }
  const double cd = g.diagonal_coupling;
  Mat3 h = Mat3::Zero();
  h(0, 0) = g.coupling * hxx + cd * dxx * r.y();
  h(0, 1) = h(1, 0) = cd * dxy;
  h(1, 1) = g.kappa_y;
  h(2, 2) = g.kappa_z;
  return h;
}

double potential(const TrapGeometry& geometry, const VoltageAssignment& volts, const Vec3& r) {
  TrapModel model(geometry);
  return model.potential(model.dense(volts), r);
}

VoltageAssignment single_well(int segment, double u_c) { return {{ChannelId::dc(segment), u_c}}; }

SecularFrequencies single_ion_frequencies(const TrapModel& model, const ElectrodeVoltages& v,
                                          const Vec3& guess) {
  Vec3 r = guess;
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    const Mat3 h = model.hessian(v, r);
    const Vec3 step = h.ldlt().solve(model.gradient(v, r));
    // Damp large steps so Newton cannot jump across neighbouring wells.
    const double limit = 0.25 * model.geometry().axial_width;
    r -= step.norm() > limit ? Vec3(step * (limit / step.norm())) : step;
    if (step.norm() < 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) throw PhysicsError("single-ion equilibrium did not converge");

  Eigen::SelfAdjointEigenSolver<Mat3> eig(model.hessian(v, r));
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw UnstableError("single-ion position is not a potential minimum");
  SecularFrequencies out;
  out.equilibrium = r;
  const double scale = units::kEvToInternal / model.geometry().ion_mass;
  for (int i = 0; i < 3; ++i) {
    out.mhz[i] = std::sqrt(scale * eig.eigenvalues()[i]) / units::kTwoPi;
    out.axes[i] = eig.eigenvectors().col(i);
  }
  auto dominant = [&](int axis) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(out.axes[i][axis]) > std::abs(out.axes[best][axis])) best = i;
    return out.mhz[best];
  };
  out.axial_mhz = dominant(0);
  out.radial_low_mhz = dominant(1);
  out.radial_high_mhz = dominant(2);
  return out;
}

namespace {

// Solves f(log p) = 0 for p > 0 on a wide logarithmic bracket.
double solve_log(const std::function<double(double)>& residual, const char* what) {
  double lo = -40.0;
  double hi = 20.0;
  const double flo = residual(std::exp(lo));
  const double fhi = residual(std::exp(hi));
  if (!(flo < 0.0 && fhi > 0.0))
    throw CalibrationError(std::string("no bracketing solution for ") + what);
  std::uintmax_t iterations = 200;
  auto root = boost::math::tools::toms748_solve(
      [&](double lp) { return residual(std::exp(lp)); }, lo, hi, flo, fhi,
      boost::math::tools::eps_tolerance<double>(50), iterations);
  if (iterations >= 200) throw CalibrationError(std::string("root finding stalled for ") + what);
  return std::exp(0.5 * (root.first + root.second));
}

}  // namespace

TrapGeometry calibrate(const CalibrationTargets& targets, TrapGeometry base) {
  if (!(targets.axial_mhz > 0 && targets.radial_low_mhz > 0 && targets.radial_high_mhz > 0))
    throw ConfigError("calibration targets must be positive");
  if (targets.radial_low_mhz == targets.radial_high_mhz)
    throw ConfigError("radial calibration targets must be distinct");
  if (!(targets.u_c < 0)) throw ConfigError("calibration trap voltage must be negative");
  base.validate();

  const auto well = single_well(base.liz_segment, targets.u_c);
  const Vec3 origin(base.center(base.liz_segment), 0.0, 0.0);
  auto frequencies = [&](const TrapGeometry& g) {
    TrapModel model(g);
    return single_ion_frequencies(model, model.dense(well), origin);
  };

  // The three constants decouple for a single well with U_d = 0.
  TrapGeometry g = base;
  g.coupling = solve_log(
      [&](double c) {
        TrapGeometry trial = g;
        trial.coupling = c;
        return frequencies(trial).axial_mhz - targets.axial_mhz;
      },
      "segment coupling");
  g.kappa_y = solve_log(
      [&](double k) {
        TrapGeometry trial = g;
        trial.kappa_y = k;
        trial.kappa_z = 2.0 * k;
        return frequencies(trial).radial_low_mhz - targets.radial_low_mhz;
      },
      "lower radial curvature");
  g.kappa_z = solve_log(
      [&](double k) {
        TrapGeometry trial = g;
        trial.kappa_z = k;
        if (k == trial.kappa_y) trial.kappa_z = k * (1 + 1e-12);
        return frequencies(trial).radial_high_mhz - targets.radial_high_mhz;
      },
      "upper radial curvature");
  g.validate();
  return g;
}

}  // namespace ionswap

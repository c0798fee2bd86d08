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

#include "ionswap/crystal.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>

#include "ionswap/errors.hpp"

namespace ionswap {

using units::kCoulomb;
using units::kEvToInternal;

CrystalState::CrystalState(std::vector<Vec3> r, std::vector<Vec3> v, double m)
    : positions(std::move(r)), velocities(std::move(v)), mass(m) {
  if (positions.empty() || positions.size() > kMaxIons)
    throw ConfigError("crystal must hold 1 to " + std::to_string(kMaxIons) + " ions");
  if (velocities.empty()) velocities.assign(positions.size(), Vec3::Zero());
  if (velocities.size() != positions.size())
    throw ConfigError("crystal positions and velocities differ in length");
  if (!(mass > 0)) throw ConfigError("ion mass must be positive");
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j)
      if ((positions[i] - positions[j]).norm() < kMinIonSeparation)
        throw ConfigError("ions closer than minimum separation");
}

HarmonicPotential HarmonicPotential::from_frequencies(const Vec3& mhz, double mass,
                                                     const Vec3& center) {
  Mat3 k = Mat3::Zero();
  for (int a = 0; a < 3; ++a) {
    const double w = units::angular(mhz[a]);
    k(a, a) = mass * w * w / kEvToInternal;
  }
  return HarmonicPotential(center, k);
}

double crystal_energy(const StaticPotential& field, std::span<const Vec3> r) {
  double e = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    e += kEvToInternal * field.potential(r[i]);
    for (std::size_t j = i + 1; j < r.size(); ++j) e += kCoulomb / (r[i] - r[j]).norm();
  }
  return e;
}

Eigen::VectorXd crystal_gradient(const StaticPotential& field, std::span<const Vec3> r) {
  const auto n = static_cast<Eigen::Index>(r.size());
  Eigen::VectorXd g(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) g.segment<3>(3 * i) = kEvToInternal * field.gradient(r[i]);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Vec3 d = r[i] - r[j];
      const double dist = d.norm();
      const Vec3 f = kCoulomb * d / (dist * dist * dist);
      g.segment<3>(3 * i) -= f;
      g.segment<3>(3 * j) += f;
    }
  return g;
}

Eigen::MatrixXd crystal_hessian(const StaticPotential& field, std::span<const Vec3> r) {
  const auto n = static_cast<Eigen::Index>(r.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    h.block<3, 3>(3 * i, 3 * i) = kEvToInternal * field.hessian(r[i]);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Vec3 d = r[i] - r[j];
      const double dist = d.norm();
      const double d3 = dist * dist * dist;
      const Mat3 k = kCoulomb * (3.0 * d * d.transpose() / (d3 * dist * dist) - Mat3::Identity() / d3);
      h.block<3, 3>(3 * i, 3 * i) += k;
      h.block<3, 3>(3 * j, 3 * j) += k;
      h.block<3, 3>(3 * i, 3 * j) -= k;
      h.block<3, 3>(3 * j, 3 * i) -= k;
    }
  return h;
}

double total_energy(const StaticPotential& field, const CrystalState& s) {
  double kinetic = 0;
  for (const auto& u : s.velocities) kinetic += 0.5 * s.mass * u.squaredNorm();
  return kinetic + crystal_energy(field, s.positions);
}

// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd flatten(std::span<const Vec3> r) {
  Eigen::VectorXd x(3 * static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) x.segment<3>(3 * Eigen::Index(i)) = r[i];
  return x;
}

std::vector<Vec3> unflatten(const Eigen::VectorXd& x) {
  std::vector<Vec3> r(static_cast<std::size_t>(x.size() / 3));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = x.segment<3>(3 * Eigen::Index(i));
  return r;
}

}  // namespace

std::vector<Vec3> find_equilibrium(const StaticPotential& field, std::vector<Vec3> guess,
                                   const EquilibriumOptions& opts) {
  if (guess.empty() || guess.size() > kMaxIons) throw ConfigError("bad ion count");
  Eigen::VectorXd x = flatten(guess);
  constexpr double kMaxStep = 20.0;  // um
  bool converged = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    auto r = unflatten(x);
    const Eigen::VectorXd g = crystal_gradient(field, r);
    if (!g.allFinite()) throw PhysicsError("non-finite force during equilibrium search");
    if (g.norm() < opts.gradient_tolerance) {
      converged = true;
      break;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(crystal_hessian(field, r));
    const Eigen::VectorXd lam = eig.eigenvalues();
    const double floor = 1e-8 * lam.cwiseAbs().maxCoeff() + 1e-300;
    const bool convex = lam.minCoeff() > 0;
    Eigen::VectorXd coeff = eig.eigenvectors().transpose() * g;
    for (Eigen::Index k = 0; k < lam.size(); ++k) coeff[k] /= std::max(std::abs(lam[k]), floor);
    Eigen::VectorXd step = -(eig.eigenvectors() * coeff);
    if (step.norm() > kMaxStep) step *= kMaxStep / step.norm();

    const double scale = 1.0 + x.cwiseAbs().maxCoeff();
    if (convex && step.norm() < 1.0) {
      // Quadratic basin: take the full Newton step; energy differences are
      // below rounding here.
      x += step;
      if (step.norm() < 1e-13 * scale) {
        converged = true;
        break;
      }
      continue;
    }
    const double e0 = crystal_energy(field, r);
    const double slope = g.dot(step);
    double a = 1.0;
    bool accepted = false;
    while (a > 1e-12) {
      Eigen::VectorXd trial = x + a * step;
      auto tr = unflatten(trial);
      bool apart = true;
      for (std::size_t i = 0; i < tr.size(); ++i)
        for (std::size_t j = i + 1; j < tr.size(); ++j)
          if ((tr[i] - tr[j]).norm() < kMinIonSeparation) apart = false;
      if (apart) {
        const double e1 = crystal_energy(field, tr);
        if (std::isfinite(e1) && e1 <= e0 + 1e-4 * a * slope) {
          x = trial;
          accepted = true;
          break;
        }
      }
      a *= 0.5;
    }
    if (!accepted) {
      if (step.norm() < 1e-10 * scale) {
        converged = true;
        break;
      }
      throw PhysicsError("equilibrium line search failed");
    }
  }
  if (!converged) throw PhysicsError("equilibrium search did not converge");
  auto r = unflatten(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(crystal_hessian(field, r),
                                                     Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0)
    throw UnstableError("equilibrium search ended on a saddle point");
  return r;
}

std::vector<Vec3> linear_guess(const StaticPotential& field, int n_ions, double x_guess) {
  if (n_ions < 1 || n_ions > kMaxIons) throw ConfigError("bad ion count");
  const Vec3 c = find_equilibrium(field, {Vec3(x_guess, 0, 0)}).front();
  const double k = kEvToInternal * field.hessian(c)(0, 0);
  if (!(k > 0)) throw UnstableError("no axial confinement at the single-ion minimum");
  const double l = std::cbrt(kCoulomb / k);
  std::vector<Vec3> r;
  if (n_ions == 1) r = {c};
  if (n_ions == 2) {
    const double h = 0.5 * std::cbrt(2.0) * l;
    r = {c - Vec3(h, 0, 0), c + Vec3(h, 0, 0)};
  }
  if (n_ions == 3) {
    const double h = std::cbrt(1.25) * l;
    r = {c - Vec3(h, 0, 0), c, c + Vec3(h, 0, 0)};
  }
  return r;
}

// ---------------------------------------------------------------------------

const NormalMode& ModeSet::mode(const std::string& label) const {
  for (const auto& m : modes)
    if (m.label == label) return m;
  throw ConfigError("no mode labelled '" + label + "'");
}

Eigen::MatrixXd ModeSet::eigenvectors() const {
  Eigen::MatrixXd out(modes.empty() ? 0 : modes.front().vector.size(),
                      static_cast<Eigen::Index>(modes.size()));
  for (std::size_t k = 0; k < modes.size(); ++k) out.col(Eigen::Index(k)) = modes[k].vector;
  return out;
}

namespace {

void label_modes(ModeSet& set) {
  const std::size_t n = set.equilibrium.size();
  if (n == 1) {
    static const char* names[] = {"axial", "radial-low", "radial-high"};
    for (auto& m : set.modes) {
      Eigen::Index axis;
      m.vector.cwiseAbs().maxCoeff(&axis);
      m.label = names[axis];
    }
  } else {
    // Ion order along the crystal's principal axis.
    Vec3 mean = Vec3::Zero();
    for (const auto& r : set.equilibrium) mean += r;
    mean /= double(n);
    Mat3 cov = Mat3::Zero();
    for (const auto& r : set.equilibrium) cov += (r - mean) * (r - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 dir = eig.eigenvectors().col(2);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      return set.equilibrium[a].dot(dir) < set.equilibrium[b].dot(dir);
    });

    std::vector<Eigen::VectorXd> templates;
    if (n == 2) {
      templates = {Eigen::Vector2d(1, 1).normalized(), Eigen::Vector2d(1, -1).normalized()};
    } else {
      templates = {Eigen::Vector3d(1, 1, 1).normalized(), Eigen::Vector3d(1, 0, -1).normalized(),
                   Eigen::Vector3d(1, -2, 1).normalized()};
    }
    const char* axial[] = {"COM", "stretch", "egyptian"};
    const char* radial[] = {"COM", n == 2 ? "rocking" : "tilt", "zigzag"};

    for (auto& m : set.modes) {
      Vec3 weight = Vec3::Zero();
      for (std::size_t i = 0; i < n; ++i)
        weight += m.vector.segment<3>(3 * Eigen::Index(i)).cwiseAbs2();
      Eigen::Index axis;
      weight.maxCoeff(&axis);
      Eigen::VectorXd pattern(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) pattern[Eigen::Index(i)] = m.vector[3 * Eigen::Index(order[i]) + axis];
      std::size_t best = 0;
      double overlap = -1;
      for (std::size_t k = 0; k < templates.size(); ++k) {
        const double o = std::abs(templates[k].dot(pattern));
        if (o > overlap) {
          overlap = o;
          best = k;
        }
      }
      if (axis == 0) {
        m.label = std::string("axial-") + axial[best];
      } else {
        m.label = std::string("radial-") + radial[best] + (axis == 1 ? "-low" : "-high");
      }
    }
  }
  // Degenerate or strongly mixed modes can collide; keep labels unique.
  for (std::size_t k = 0; k < set.modes.size(); ++k) {
    int copies = 1;
    for (std::size_t j = 0; j < k; ++j)
      if (set.modes[j].label == set.modes[k].label ||
          set.modes[j].label.rfind(set.modes[k].label + "#", 0) == 0)
        ++copies;
    if (copies > 1) set.modes[k].label += "#" + std::to_string(copies);
  }
}

}  // namespace

ModeSet normal_modes(const StaticPotential& field, std::vector<Vec3> equilibrium, double mass) {
  if (!(mass > 0)) throw ConfigError("ion mass must be positive");
  ModeSet set;
  set.mass = mass;
  set.equilibrium = std::move(equilibrium);
  const Eigen::MatrixXd h = crystal_hessian(field, set.equilibrium) / mass;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  if (eig.info() != Eigen::Success) throw PhysicsError("mode decomposition failed");
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    const double lam = eig.eigenvalues()[k];
    if (!(lam > 0))
      throw UnstableError("unstable configuration: mode " + std::to_string(k) +
                          " has eigenvalue " + std::to_string(lam));
    Eigen::VectorXd vec = eig.eigenvectors().col(k);
    // Fix the sign convention: largest component positive.
    Eigen::Index big;
    vec.cwiseAbs().maxCoeff(&big);
    if (vec[big] < 0) vec = -vec;
    set.modes.push_back({std::sqrt(lam) / units::kTwoPi, vec, {}});
  }
  label_modes(set);
  return set;
}

// ---------------------------------------------------------------------------

VoltageSource static_voltages(ElectrodeVoltages v) {
  return [v = std::move(v)](double, ElectrodeVoltages& out) { out = v; };
}

VoltageSource filtered_voltages(const TrapModel& model, const FilteredSchedule& filtered,
                                ElectrodeVoltages base) {
  auto shared = std::make_shared<const FilteredSchedule>(filtered);
  return [shared, geometry = model.geometry(), base = std::move(base)](double t,
                                                                     ElectrodeVoltages& out) {
    out = base;
    shared->write(t, geometry, out);
  };
}

Trajectory integrate(const TrapModel& model, const VoltageSource& voltages, CrystalState state,
                     double t0, double t1, const IntegrationOptions& opts) {
  if (!(opts.dt > 0)) throw ConfigError("integration step must be positive");
  if (!(t1 >= t0)) throw ConfigError("integration interval is reversed");
  const CrystalState checked(state.positions, state.velocities, state.mass);
  const std::size_t n = state.size();
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / opts.dt - 1e-9));
  const double dt = steps > 0 ? (t1 - t0) / double(steps) : 0.0;
  const auto& g = model.geometry();
  const double x_lo = g.center(g.first_segment) - g.spacing;
  const double x_hi = g.center(g.last_segment) + g.spacing;

  Trajectory out;
  auto record = [&](double t) {
    out.times.push_back(t);
    out.positions.push_back(state.positions);
  };
  record(t0);

  ElectrodeVoltages v = model.zero_voltages();
  std::vector<Vec3> accel(n);
  const double inv_m = 1.0 / state.mass;
  for (long k = 0; k < steps; ++k) {
    const double t_mid = t0 + (double(k) + 0.5) * dt;
    for (std::size_t i = 0; i < n; ++i) state.positions[i] += 0.5 * dt * state.velocities[i];
    voltages(t_mid, v);
    for (std::size_t i = 0; i < n; ++i)
      accel[i] = -kEvToInternal * inv_m * model.gradient(v, state.positions[i]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const Vec3 d = state.positions[i] - state.positions[j];
        const double dist = d.norm();
        const Vec3 f = (kCoulomb * inv_m / (dist * dist * dist)) * d;
        accel[i] += f;
        accel[j] -= f;
      }
    const double t_end = t0 + double(k + 1) * dt;
    for (std::size_t i = 0; i < n; ++i) {
      state.velocities[i] += dt * accel[i];
      state.positions[i] += 0.5 * dt * state.velocities[i];
      const Vec3& r = state.positions[i];
      const double radial = std::max(std::abs(r.y()), std::abs(r.z()));
      out.max_radial = std::max(out.max_radial, radial);
      if (!r.allFinite() || radial > opts.radial_limit || r.x() < x_lo || r.x() > x_hi)
        throw EscapeError("ion " + std::to_string(i) + " left the trap volume", t_end);
      for (std::size_t j = 0; j < i; ++j)
        if ((r - state.positions[j]).norm() < kMinIonSeparation)
          throw EscapeError("ions " + std::to_string(j) + " and " + std::to_string(i) + " collided",
                            t_end);
    }
    if (opts.stride > 0 && (k + 1) % opts.stride == 0 && k + 1 != steps) record(t_end);
  }
  if (steps > 0) record(t1);
  out.final_state = std::move(state);
  return out;
}

void write_csv(std::ostream& out, const Trajectory& trajectory) {
  out << std::setprecision(12) << "t_us";
  const std::size_t n = trajectory.positions.empty() ? 0 : trajectory.positions.front().size();
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i << ",y" << i << ",z" << i;
  out << "\n";
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    out << trajectory.times[k];
    for (const auto& r : trajectory.positions[k]) out << "," << r.x() << "," << r.y() << "," << r.z();
    out << "\n";
  }
}

// ---------------------------------------------------------------------------

double ExcitationReport::max_nbar() const {
  double m = 0;
  for (const auto& e : modes) m = std::max(m, e.nbar);
  return m;
}

const ModeExcitation& ExcitationReport::mode(const std::string& label) const {
  for (const auto& e : modes)
    if (e.label == label) return e;
  throw ConfigError("no mode labelled '" + label + "'");
}

ExcitationReport mode_excitation(const CrystalState& state, const ModeSet& modes) {
  if (state.size() != modes.equilibrium.size())
    throw ConfigError("state and mode set have different ion counts");
  const double sm = std::sqrt(modes.mass);
  Eigen::VectorXd dq(3 * Eigen::Index(state.size()));
  Eigen::VectorXd dp(dq.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    dq.segment<3>(3 * Eigen::Index(i)) = sm * (state.positions[i] - modes.equilibrium[i]);
    dp.segment<3>(3 * Eigen::Index(i)) = sm * state.velocities[i];
  }
  ExcitationReport report;
  for (const auto& m : modes.modes) {
    const double w = units::angular(m.mhz);
    const double q_zpf = std::sqrt(units::kHbar / (2.0 * w));
    const double p_zpf = std::sqrt(units::kHbar * w / 2.0);
    const std::complex<double> alpha(m.vector.dot(dq) / (2.0 * q_zpf),
                                     m.vector.dot(dp) / (2.0 * p_zpf));
    report.modes.push_back({m.label, m.mhz, alpha, std::norm(alpha), q_zpf});
  }
  return report;
}

ExcitationReport mode_excitation(const StaticPotential& final_field, const CrystalState& state) {
  auto eq = find_equilibrium(final_field, state.positions);
  return mode_excitation(state, normal_modes(final_field, std::move(eq), state.mass));
}

CrystalState thermal_state(const ModeSet& modes, std::span<const double> nbar,
                           std::mt19937_64& rng) {
  if (nbar.size() != modes.modes.size()) throw ConfigError("need one n-bar per mode");
  std::normal_distribution<double> normal;
  const double sm = std::sqrt(modes.mass);
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(3 * Eigen::Index(modes.equilibrium.size()));
  Eigen::VectorXd dp = dq;
  for (std::size_t k = 0; k < nbar.size(); ++k) {
    if (!(nbar[k] >= 0)) throw ConfigError("n-bar must be non-negative");
    const auto& m = modes.modes[k];
    const double w = units::angular(m.mhz);
    const double s = std::sqrt(0.5 * nbar[k]);
    const double re = s * normal(rng);
    const double im = s * normal(rng);
    dq += 2.0 * std::sqrt(units::kHbar / (2.0 * w)) * re * m.vector;
    dp += 2.0 * std::sqrt(units::kHbar * w / 2.0) * im * m.vector;
  }
  std::vector<Vec3> r(modes.equilibrium.size()), v(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = modes.equilibrium[i] + dq.segment<3>(3 * Eigen::Index(i)) / sm;
    v[i] = dp.segment<3>(3 * Eigen::Index(i)) / sm;
  }
  return CrystalState(std::move(r), std::move(v), modes.mass);
}

CrystalState rest_state(const ModeSet& modes) {
  return CrystalState(modes.equilibrium, {}, modes.mass);
}

// ---------------------------------------------------------------------------

SwapSimulation simulate_swap(const TrapModel& model, const SwapRampParams& params,
                             const FilterModel& filter, const IntegrationOptions& opts) {
  const auto schedule = swap_schedule(params);
  const FilteredSchedule filtered(schedule, filter);
  ElectrodeVoltages start = model.zero_voltages();
  filtered.write(0.0, model.geometry(), start);
  const ElectrodeVoltages final_v = model.dense(schedule.last());

  const double mass = model.geometry().ion_mass;
  const ElectrodePotential start_field(model, start);
  auto eq = find_equilibrium(start_field,
                             linear_guess(start_field, 2, model.geometry().center(params.site)));
  if (eq[0].x() > eq[1].x()) std::swap(eq[0], eq[1]);
  CrystalState initial(eq, {}, mass);

  SwapSimulation sim;
  sim.simulated_us = filtered.end_time();
  sim.trajectory = integrate(model, filtered_voltages(model, filtered, model.zero_voltages()),
                             initial, 0.0, sim.simulated_us, opts);
  sim.max_radial = sim.trajectory.max_radial;
  const auto& fin = sim.trajectory.final_state;
  sim.swapped = fin.positions[0].x() > fin.positions[1].x();
  sim.excitation = mode_excitation(ElectrodePotential(model, final_v), fin);
  return sim;
}

double swap_objective(const TrapModel& model, const SwapRampParams& params,
                      const FilterModel& filter, const IntegrationOptions& opts,
                      double failure_penalty) {
  IntegrationOptions quiet = opts;
  quiet.stride = 0;
  try {
    auto sim = simulate_swap(model, params, filter, quiet);
    if (!sim.swapped) return failure_penalty;
    return sim.excitation.max_nbar();
  } catch (const PhysicsError&) {
    return failure_penalty;
  }
}

}  // namespace ionswap

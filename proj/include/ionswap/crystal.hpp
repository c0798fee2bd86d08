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

// Classical N-ion crystal: equilibrium, normal modes, time integration in a
// time-dependent electrode field, and coherent-amplitude mode excitation.

#include <complex>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ionswap/trap_model.hpp"
#include "ionswap/units.hpp"
#include "ionswap/waveform.hpp"

namespace ionswap {

inline constexpr double kMinIonSeparation = 0.1;  // um
inline constexpr int kMaxIons = 3;

struct CrystalState {
  std::vector<Vec3> positions;   // um
  std::vector<Vec3> velocities;  // um/us
  double mass = units::kCalciumMass;

  CrystalState() = default;
  /// Throws ConfigError for 0 or more than kMaxIons ions, mismatched sizes, or
  /// ions closer than kMinIonSeparation. Empty `velocities` means at rest.
  explicit CrystalState(std::vector<Vec3> positions, std::vector<Vec3> velocities = {},
                        double mass = units::kCalciumMass);

  std::size_t size() const { return positions.size(); }
};

/// Time-independent single-charge potential (V) with analytic derivatives.
class StaticPotential {
 public:
  virtual ~StaticPotential() = default;
  virtual double potential(const Vec3& r) const = 0;
  virtual Vec3 gradient(const Vec3& r) const = 0;
  virtual Mat3 hessian(const Vec3& r) const = 0;
};

/// Electrode potential at fixed voltages. Keeps a reference to `model`.
class ElectrodePotential final : public StaticPotential {
 public:
  ElectrodePotential(const TrapModel& model, ElectrodeVoltages v) : model_(model), v_(std::move(v)) {}
  double potential(const Vec3& r) const override { return model_.potential(v_, r); }
  Vec3 gradient(const Vec3& r) const override { return model_.gradient(v_, r); }
  Mat3 hessian(const Vec3& r) const override { return model_.hessian(v_, r); }

 private:
  const TrapModel& model_;
  ElectrodeVoltages v_;
};

/// 0.5 (r - c)^T K (r - c) with K in V/um^2.
class HarmonicPotential final : public StaticPotential {
 public:
  HarmonicPotential(Vec3 center, Mat3 curvature) : c_(std::move(center)), k_(std::move(curvature)) {}
  /// Diagonal well giving a single ion of `mass` the three frequencies (x, y, z).
  static HarmonicPotential from_frequencies(const Vec3& mhz, double mass = units::kCalciumMass,
                                            const Vec3& center = Vec3::Zero());
  double potential(const Vec3& r) const override { return 0.5 * (r - c_).dot(k_ * (r - c_)); }
  Vec3 gradient(const Vec3& r) const override { return k_ * (r - c_); }
  Mat3 hessian(const Vec3&) const override { return k_; }

 private:
  Vec3 c_;
  Mat3 k_;
};

// Energies are in u um^2 / us^2, gradients in u um / us^2.
double crystal_energy(const StaticPotential& field, std::span<const Vec3> positions);
Eigen::VectorXd crystal_gradient(const StaticPotential& field, std::span<const Vec3> positions);
Eigen::MatrixXd crystal_hessian(const StaticPotential& field, std::span<const Vec3> positions);
/// Potential plus kinetic energy.
double total_energy(const StaticPotential& field, const CrystalState& s);

struct EquilibriumOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-10;
};

/// Damped Newton with absolute-eigenvalue Hessian modification. Converged when
/// the gradient norm is below tolerance, or the step has reached the rounding
/// floor of the coordinates. Throws PhysicsError on non-convergence and
/// UnstableError if the result is a saddle.
std::vector<Vec3> find_equilibrium(const StaticPotential& field, std::vector<Vec3> guess,
                                   const EquilibriumOptions& opts = {});

/// Ions placed symmetrically along x around the single-ion minimum near x_guess.
std::vector<Vec3> linear_guess(const StaticPotential& field, int n_ions, double x_guess);

struct NormalMode {
  double mhz = 0;
  Eigen::VectorXd vector;  // mass-weighted, unit norm, length 3N
  std::string label;
};

struct ModeSet {
  std::vector<Vec3> equilibrium;
  double mass = units::kCalciumMass;
  std::vector<NormalMode> modes;  // ascending frequency

  /// Throws ConfigError for an unknown label.
  const NormalMode& mode(const std::string& label) const;
  Eigen::MatrixXd eigenvectors() const;
};

/// Labels: axial-COM, axial-stretch, radial-COM-low, radial-rocking-low,
/// radial-COM-high, radial-rocking-high for two ions; three ions use
/// COM/stretch/egyptian axially and COM/tilt/zigzag radially; one ion uses
/// axial, radial-low, radial-high. Throws UnstableError for a non-positive
/// eigenvalue.
ModeSet normal_modes(const StaticPotential& field, std::vector<Vec3> equilibrium,
                     double mass = units::kCalciumMass);

// ---------------------------------------------------------------------------

/// Electrode voltages at time t (us).
using VoltageSource = std::function<void(double t, ElectrodeVoltages& out)>;

VoltageSource static_voltages(ElectrodeVoltages v);
/// Filtered schedule on top of `base` (channels not in the schedule keep
/// their base value). The schedule is copied.
VoltageSource filtered_voltages(const TrapModel& model, const FilteredSchedule& filtered,
                                ElectrodeVoltages base);

struct IntegrationOptions {
  double dt = 0.002;            // us
  int stride = 50;              // record every stride-th step; 0 records only the ends
  double radial_limit = 100.0;  // um from the axis before an ion counts as lost
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<Vec3>> positions;
  CrystalState final_state;
  double max_radial = 0;  // largest |y| or |z| reached, um
};

/// Drift-kick-drift (position Verlet): the force is evaluated once per step
/// at the midpoint time and position. Throws EscapeError when an ion leaves
/// the trap volume or two ions collide.
Trajectory integrate(const TrapModel& model, const VoltageSource& voltages, CrystalState state0,
                     double t0, double t1, const IntegrationOptions& opts = {});

void write_csv(std::ostream& out, const Trajectory& trajectory);

// ---------------------------------------------------------------------------

struct ModeExcitation {
  std::string label;
  double mhz = 0;
  std::complex<double> alpha;
  double nbar = 0;
  double q_zpf = 0;  // sqrt(hbar / 2 omega), mass-weighted
};

struct ExcitationReport {
  std::vector<ModeExcitation> modes;

  double max_nbar() const;
  const ModeExcitation& mode(const std::string& label) const;
};

ExcitationReport mode_excitation(const CrystalState& state, const ModeSet& modes);
/// Finds the final equilibrium near the state's positions first.
ExcitationReport mode_excitation(const StaticPotential& final_field, const CrystalState& state);

/// Classical thermal sample: each mode gets a complex Gaussian amplitude with
/// <|alpha|^2> = nbar[m].
CrystalState thermal_state(const ModeSet& modes, std::span<const double> nbar, std::mt19937_64& rng);

/// Ions at rest in their equilibrium.
CrystalState rest_state(const ModeSet& modes);

// ---------------------------------------------------------------------------

struct SwapSimulation {
  ExcitationReport excitation;
  bool swapped = false;
  double simulated_us = 0;  // schedule plus filter settling tail
  double max_radial = 0;
  Trajectory trajectory;
};

/// Two ions start at rest in the static well at the swap site; the filtered
/// swap schedule runs until the filter has settled.
SwapSimulation simulate_swap(const TrapModel& model, const SwapRampParams& params,
                             const FilterModel& filter = {}, const IntegrationOptions& opts = {});

/// Max n-bar over modes, or `failure_penalty` if the ions did not exchange or
/// were lost.
double swap_objective(const TrapModel& model, const SwapRampParams& params,
                      const FilterModel& filter = {}, const IntegrationOptions& opts = {},
                      double failure_penalty = 1e3);

}  // namespace ionswap

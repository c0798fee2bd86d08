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

// Internal (spin) state of up to three ions: rotations, field-induced phase
// accumulation along position histories, shelving and noisy readout.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ionswap {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CMatrix2 = Eigen::Matrix2cd;

/// Basis per ion: index 0 = down, 1 = up. Joint index has the first label as
/// most significant bit, so bitstrings read in label order.
namespace pauli {
CMatrix2 identity();
CMatrix2 x();
CMatrix2 y();
CMatrix2 z();
}  // namespace pauli

/// exp(-i theta/2 (cos(phi) X + sin(phi) Y)).
CMatrix2 rotation(double theta, double phi);
/// Free precession by phi: exp(i phi Z / 2); up picks up exp(-i phi) relative to down.
CMatrix2 precession(double phi);
/// Analysis-pulse phase that undoes a precession of `accumulated` radians.
double corrected_phase(double pulse_phase, double accumulated);

class QubitRegister {
 public:
  /// All ions start in |down>. Labels must be unique and non-empty.
  explicit QubitRegister(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t dimension() const { return std::size_t{1} << labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Throws ConfigError for an unknown label.
  std::size_t index_of(const std::string& label) const;

  const CMatrix& density() const { return rho_; }
  void set_pure(const Eigen::VectorXcd& psi);
  void set_density(const CMatrix& rho);

  void apply(const std::string& label, const CMatrix2& u);
  void rotate(const std::string& label, double theta, double phi) {
    apply(label, rotation(theta, phi));
  }
  void precess(const std::string& label, double phi) { apply(label, precession(phi)); }
  /// Optical pumping: the ion ends in |up>, other ions untouched.
  void pump(const std::string& label);
  /// Removes the ion's coherences (population-preserving shelving).
  void dephase(const std::string& label);
  /// Depolarizing channel with probability p.
  void depolarize(const std::string& label, double p);

  /// Z-basis populations by joint index.
  std::vector<double> probabilities() const;
  double trace() const { return rho_.trace().real(); }

 private:
  CMatrix embed(std::size_t ion, const CMatrix2& op) const;

  std::vector<std::string> labels_;
  CMatrix rho_;
};

// ---------------------------------------------------------------------------

/// Field deviation from its LIZ value (T) vs axial position (um). The raw
/// callable is shifted so that delta_b(x_liz) == 0 exactly.
class FieldMap {
 public:
  FieldMap() : FieldMap(0.0, 5e-11, 1e-14) {}
  /// g1 (x - x_liz) + g2 (x - x_liz)^2 with g1 in T/um, g2 in T/um^2.
  FieldMap(double x_liz, double g1, double g2);
  FieldMap(double x_liz, std::function<double(double)> raw);

  double delta_b(double x) const;
  double x_liz() const { return x_liz_; }
  /// True when delta_b is a polynomial of degree <= 2 (Simpson is exact).
  bool quadratic() const { return quadratic_; }

 private:
  double x_liz_ = 0;
  std::function<double(double)> raw_;
  double offset_ = 0;
  bool quadratic_ = false;
};

/// Piecewise-linear axial position of one ion; pieces may leave gaps.
class PositionHistory {
 public:
  struct Piece {
    double t0, t1, x0, x1;
  };

  /// Throws ConfigError if t1 < t0 or the piece starts before the last one ends.
  void add(double t0, double t1, double x0, double x1);
  void hold(double t0, double t1, double x) { add(t0, t1, x, x); }

  const std::vector<Piece>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  double start() const;
  double end() const;
  /// Throws PhysicsError if t is not covered.
  double position(double t) const;

 private:
  std::vector<Piece> pieces_;
};

/// Per-ion axial history from a sampled trajectory (linear between samples).
struct Trajectory;
PositionHistory history_from_trajectory(const Trajectory& trajectory, std::size_t ion,
                                        double t_offset = 0.0);

/// (mu_B g_J / hbar) * integral of delta_b(x(t)) over [t_from, t_to], by
/// composite Simpson per piece. Throws PhysicsError if the window crosses a gap
/// or leaves the history.
double accumulate_phase(const PositionHistory& history, const FieldMap& field, double t_from,
                        double t_to, int panels_per_piece = 8);

// ---------------------------------------------------------------------------

struct ReadoutError {
  double up = 0;    // P(read down | up)
  double down = 0;  // P(read up | down)
};

struct ReadoutModel {
  ReadoutError uniform;
  std::map<std::string, ReadoutError> per_ion;

  const ReadoutError& error(const std::string& label) const;
  /// Columns: true down, true up; rows: read down, read up.
  Eigen::Matrix2d confusion(const std::string& label) const;
  void validate() const;
};

/// Outcome distribution after readout errors, by joint index.
std::vector<double> noisy_probabilities(const QubitRegister& reg, const ReadoutModel& readout);

/// Per-shot bitstrings in label order ('1' = up).
std::vector<std::string> measure(const QubitRegister& reg, const ReadoutModel& readout,
                                 std::size_t shots, std::uint64_t seed);
/// Outcome counts by joint index; same distribution as `measure`.
std::vector<std::uint64_t> measure_counts(const QubitRegister& reg, const ReadoutModel& readout,
                                          std::size_t shots, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_sigma = 0;
  double intercept_sigma = 0;
  double chi2 = 0;
};

/// Weighted least squares y = a t + b. Throws FitError for fewer than three
/// points or a degenerate design.
LinearFit weighted_line_fit(std::span<const double> t, std::span<const double> y,
                            std::span<const double> sigma);

/// One spin-echo probe at position x with hold time `hold`: the ion is
/// prepared with R_X(pi/2) from |up>, shuttled to x, held, returned, refocused
/// with R_X(pi), held at the LIZ, and analysed with R(pi/2, phase) for
/// phase = 0 and pi/2. Returns the number of 'up' outcomes for each.
using EchoProbe = std::function<std::array<std::uint64_t, 2>(
    double x, double hold, std::size_t shots, std::uint64_t seed)>;

struct PhaseSample {
  double hold = 0;
  double phase = 0;  // accumulated before the echo pulse, unwrapped
  double sigma = 0;
};

struct FieldEstimate {
  double x = 0;
  double delta_b = 0;  // T
  double sigma = 0;
  double phi0 = 0;
  double phi0_sigma = 0;
  std::vector<PhaseSample> samples;
};

/// Phase before the echo pulse from the two analysis counts, with its
/// binomial standard error.
PhaseSample echo_phase(std::array<std::uint64_t, 2> up_counts, std::size_t shots);

/// Fits phase = (mu_B g_J / hbar) delta_b(x) t + phi0 at each position.
std::vector<FieldEstimate> ramsey_field_scan(const EchoProbe& probe,
                                             std::span<const double> positions,
                                             std::span<const double> holds, std::size_t shots,
                                             std::uint64_t seed);

}  // namespace ionswap

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

#include "ionswap/qubit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "ionswap/crystal.hpp"
#include "ionswap/errors.hpp"
#include "ionswap/random.hpp"
#include "ionswap/units.hpp"

namespace ionswap {

namespace pauli {
CMatrix2 identity() { return CMatrix2::Identity(); }
CMatrix2 x() {
  CMatrix2 m;
  m << 0, 1, 1, 0;
  return m;
}
CMatrix2 y() {
  CMatrix2 m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
CMatrix2 z() {
  CMatrix2 m;
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

CMatrix2 rotation(double theta, double phi) {
  const Complex i(0, 1);
  const CMatrix2 n = std::cos(phi) * pauli::x() + std::sin(phi) * pauli::y();
  return std::cos(theta / 2) * pauli::identity() - i * std::sin(theta / 2) * n;
}

CMatrix2 precession(double phi) {
  CMatrix2 m = CMatrix2::Zero();
  m(0, 0) = std::polar(1.0, phi / 2);
  m(1, 1) = std::polar(1.0, -phi / 2);
  return m;
}

double corrected_phase(double pulse_phase, double accumulated) { return pulse_phase - accumulated; }

// ---------------------------------------------------------------------------

QubitRegister::QubitRegister(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty() || labels_.size() > 3) throw ConfigError("register holds 1 to 3 qubits");
  std::set<std::string> seen;
  for (const auto& l : labels_)
    if (l.empty() || !seen.insert(l).second) throw ConfigError("qubit labels must be unique");
  rho_ = CMatrix::Zero(Eigen::Index(dimension()), Eigen::Index(dimension()));
  rho_(0, 0) = 1.0;
}

std::size_t QubitRegister::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ConfigError("unknown qubit '" + label + "'");
  return std::size_t(it - labels_.begin());
}

void QubitRegister::set_pure(const Eigen::VectorXcd& psi) {
  if (psi.size() != Eigen::Index(dimension())) throw ConfigError("state has wrong dimension");
  const double n = psi.norm();
  if (!(n > 0)) throw ConfigError("zero state vector");
  const Eigen::VectorXcd u = psi / n;
  rho_ = u * u.adjoint();
}

void QubitRegister::set_density(const CMatrix& rho) {
  if (rho.rows() != Eigen::Index(dimension()) || rho.cols() != rho.rows())
    throw ConfigError("density matrix has wrong dimension");
  if (std::abs(rho.trace() - Complex(1.0)) > 1e-12) throw ConfigError("density matrix trace != 1");
  rho_ = rho;
}

CMatrix QubitRegister::embed(std::size_t ion, const CMatrix2& op) const {
  const std::size_t n = labels_.size();
  CMatrix out = CMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < n; ++k) {
    const CMatrix2 f = k == ion ? op : pauli::identity();
    CMatrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index c = 0; c < out.cols(); ++c) next.block<2, 2>(2 * r, 2 * c) = out(r, c) * f;
    out = std::move(next);
  }
  return out;
}

void QubitRegister::apply(const std::string& label, const CMatrix2& u) {
  const CMatrix full = embed(index_of(label), u);
  rho_ = full * rho_ * full.adjoint();
}

void QubitRegister::pump(const std::string& label) {
  const std::size_t k = index_of(label);
  CMatrix2 k0 = CMatrix2::Zero(), k1 = CMatrix2::Zero();
  k0(1, 1) = 1.0;  // |up><up|
  k1(1, 0) = 1.0;  // |up><down|
  const CMatrix a = embed(k, k0), b = embed(k, k1);
  rho_ = a * rho_ * a.adjoint() + b * rho_ * b.adjoint();
}

void QubitRegister::dephase(const std::string& label) {
  const CMatrix z = embed(index_of(label), pauli::z());
  rho_ = 0.5 * (rho_ + z * rho_ * z.adjoint());
}

void QubitRegister::depolarize(const std::string& label, double p) {
  if (!(p >= 0 && p <= 1)) throw ConfigError("depolarizing probability outside [0,1]");
  if (p == 0) return;
  const std::size_t k = index_of(label);
  CMatrix sum = CMatrix::Zero(rho_.rows(), rho_.cols());
  for (const auto& s : {pauli::x(), pauli::y(), pauli::z()}) {
    const CMatrix e = embed(k, s);
    sum += e * rho_ * e.adjoint();
  }
  rho_ = (1.0 - 0.75 * p) * rho_ + 0.25 * p * sum;
}

std::vector<double> QubitRegister::probabilities() const {
  std::vector<double> p(dimension());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::max(0.0, rho_(Eigen::Index(i), Eigen::Index(i)).real());
  return p;
}

// ---------------------------------------------------------------------------

FieldMap::FieldMap(double x_liz, double g1, double g2)
    : x_liz_(x_liz),
      raw_([x_liz, g1, g2](double x) {
        const double d = x - x_liz;
        return g1 * d + g2 * d * d;
      }),
      offset_(0.0),
      quadratic_(true) {}

FieldMap::FieldMap(double x_liz, std::function<double(double)> raw)
    : x_liz_(x_liz), raw_(std::move(raw)) {
  if (!raw_) throw ConfigError("empty field map");
  offset_ = raw_(x_liz_);
}

double FieldMap::delta_b(double x) const {
  if (x == x_liz_) return 0.0;
  return raw_(x) - offset_;
}

void PositionHistory::add(double t0, double t1, double x0, double x1) {
  if (!(t1 >= t0)) throw ConfigError("history piece ends before it starts");
  if (!pieces_.empty() && t0 < pieces_.back().t1 - 1e-9)
    throw ConfigError("history pieces must be added in time order");
  pieces_.push_back({t0, t1, x0, x1});
}

double PositionHistory::start() const {
  if (pieces_.empty()) throw PhysicsError("empty position history");
  return pieces_.front().t0;
}

double PositionHistory::end() const {
  if (pieces_.empty()) throw PhysicsError("empty position history");
  return pieces_.back().t1;
}

double PositionHistory::position(double t) const {
  for (const auto& p : pieces_) {
    if (t >= p.t0 && t <= p.t1) {
      if (p.t1 == p.t0) return p.x1;
      return p.x0 + (p.x1 - p.x0) * (t - p.t0) / (p.t1 - p.t0);
    }
  }
  throw PhysicsError("position history has no data at t = " + std::to_string(t));
}

PositionHistory history_from_trajectory(const Trajectory& trajectory, std::size_t ion,
                                        double t_offset) {
  PositionHistory h;
  for (std::size_t k = 1; k < trajectory.times.size(); ++k) {
    if (ion >= trajectory.positions[k].size()) throw ConfigError("trajectory has no such ion");
    h.add(t_offset + trajectory.times[k - 1], t_offset + trajectory.times[k],
          trajectory.positions[k - 1][ion].x(), trajectory.positions[k][ion].x());
  }
  return h;
}

double accumulate_phase(const PositionHistory& history, const FieldMap& field, double t_from,
                        double t_to, int panels_per_piece) {
  if (!(t_to >= t_from)) throw ConfigError("phase window is reversed");
  if (panels_per_piece < 1) throw ConfigError("need at least one Simpson panel");
  if (t_to == t_from) return 0.0;
  constexpr double kJoin = 1e-9;  // us
  double cursor = t_from;
  double integral = 0.0;
  for (const auto& p : history.pieces()) {
    if (p.t1 <= cursor || p.t0 >= t_to) continue;
    if (p.t0 > cursor + kJoin)
      throw PhysicsError("position history has a gap at t = " + std::to_string(cursor));
    const double a = std::max(p.t0, cursor);
    const double b = std::min(p.t1, t_to);
    if (b > a) {
      auto x_at = [&](double t) {
        return p.t1 == p.t0 ? p.x1 : p.x0 + (p.x1 - p.x0) * (t - p.t0) / (p.t1 - p.t0);
      };
      const int m = 2 * panels_per_piece;
      const double h = (b - a) / m;
      double s = field.delta_b(x_at(a)) + field.delta_b(x_at(b));
      for (int k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * field.delta_b(x_at(a + k * h));
      integral += s * h / 3.0;
    }
    cursor = std::max(cursor, b);
    if (cursor >= t_to) break;
  }
  if (cursor < t_to - kJoin)
    throw PhysicsError("position history ends at t = " + std::to_string(cursor) +
                       " inside the phase window");
  return units::kZeemanRate * integral;
}

// ---------------------------------------------------------------------------

const ReadoutError& ReadoutModel::error(const std::string& label) const {
  auto it = per_ion.find(label);
  return it == per_ion.end() ? uniform : it->second;
}

Eigen::Matrix2d ReadoutModel::confusion(const std::string& label) const {
  const auto& e = error(label);
  Eigen::Matrix2d c;
  c << 1 - e.down, e.up, e.down, 1 - e.up;
  return c;
}

void ReadoutModel::validate() const {
  auto check = [](const ReadoutError& e) {
    if (!(e.up >= 0 && e.up < 0.5 && e.down >= 0 && e.down < 0.5))
      throw ConfigError("readout error rates must lie in [0, 0.5)");
  };
  check(uniform);
  for (const auto& [label, e] : per_ion) check(e);
}

std::vector<double> noisy_probabilities(const QubitRegister& reg, const ReadoutModel& readout) {
  readout.validate();
  std::vector<double> p = reg.probabilities();
  const std::size_t n = reg.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Matrix2d c = readout.confusion(reg.labels()[k]);
    const std::size_t bit = std::size_t{1} << (n - 1 - k);
    std::vector<double> q(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const int truth = (i & bit) ? 1 : 0;
      q[i & ~bit] += c(0, truth) * p[i];
      q[i | bit] += c(1, truth) * p[i];
    }
    p = std::move(q);
  }
  return p;
}

namespace {

std::string bitstring(std::size_t index, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t k = 0; k < n; ++k)
    if (index & (std::size_t{1} << (n - 1 - k))) s[k] = '1';
  return s;
}

}  // namespace

std::vector<std::string> measure(const QubitRegister& reg, const ReadoutModel& readout,
                                 std::size_t shots, std::uint64_t seed) {
  const auto p = noisy_probabilities(reg, readout);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
  std::vector<std::string> out;
  out.reserve(shots);
  for (std::size_t s = 0; s < shots; ++s) out.push_back(bitstring(pick(rng), reg.size()));
  return out;
}

std::vector<std::uint64_t> measure_counts(const QubitRegister& reg, const ReadoutModel& readout,
                                          std::size_t shots, std::uint64_t seed) {
  const auto p = noisy_probabilities(reg, readout);
  std::mt19937_64 rng(seed);
  // Multinomial via conditional binomials.
  std::vector<std::uint64_t> counts(p.size(), 0);
  std::uint64_t left = shots;
  double mass = 1.0;
  for (std::size_t i = 0; i + 1 < p.size() && left > 0; ++i) {
    const double q = mass > 0 ? std::clamp(p[i] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> draw(left, q);
    counts[i] = draw(rng);
    left -= counts[i];
    mass -= p[i];
  }
  counts.back() += left;
  return counts;
}

// ---------------------------------------------------------------------------

LinearFit weighted_line_fit(std::span<const double> t, std::span<const double> y,
                            std::span<const double> sigma) {
  if (t.size() != y.size() || t.size() != sigma.size()) throw FitError("fit inputs differ in length");
  if (t.size() < 3) throw FitError("need at least three points for a line fit");
  double s = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(sigma[i] > 0)) throw FitError("fit uncertainties must be positive");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    s += w;
    st += w * t[i];
    sy += w * y[i];
    stt += w * t[i] * t[i];
    sty += w * t[i] * y[i];
  }
  const double det = s * stt - st * st;
  if (!(det > 1e-12 * s * stt)) throw FitError("degenerate line fit (all abscissae equal)");
  LinearFit f;
  f.slope = (s * sty - st * sy) / det;
  f.intercept = (stt * sy - st * sty) / det;
  f.slope_sigma = std::sqrt(s / det);
  f.intercept_sigma = std::sqrt(stt / det);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = (y[i] - f.slope * t[i] - f.intercept) / sigma[i];
    f.chi2 += r * r;
  }
  return f;
}

PhaseSample echo_phase(std::array<std::uint64_t, 2> up_counts, std::size_t shots) {
  if (shots == 0) throw FitError("no shots");
  const double n = double(shots);
  const double p0 = double(up_counts[0]) / n;
  const double p1 = double(up_counts[1]) / n;
  // P(up | analysis phase a) = (1 - cos(a + psi)) / 2 with psi = pi - phi.
  const double x = 2 * p0 - 1;
  const double y = 2 * p1 - 1;
  const double r2 = x * x + y * y;
  if (!(r2 > 0)) throw FitError("no Ramsey contrast");
  const double psi = std::atan2(y, -x);
  // Binomial variances with a half-count floor so extreme outcomes keep weight.
  auto var = [&](std::uint64_t k) {
    const double p = (double(k) + 0.5) / (n + 1.0);
    return 4 * p * (1 - p) / n;
  };
  const double v = (y * y * var(up_counts[0]) + x * x * var(up_counts[1])) / (r2 * r2);
  PhaseSample s;
  s.phase = std::remainder(std::numbers::pi - psi, 2 * std::numbers::pi);
  s.sigma = std::sqrt(v);
  return s;
}

std::vector<FieldEstimate> ramsey_field_scan(const EchoProbe& probe,
                                             std::span<const double> positions,
                                             std::span<const double> holds, std::size_t shots,
                                             std::uint64_t seed) {
  if (holds.size() < 3) throw FitError("field scan needs at least three hold times");
  if (shots == 0) throw ConfigError("field scan needs shots");
  std::vector<double> sorted(holds.begin(), holds.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<FieldEstimate> out;
  std::uint64_t job = 0;
  for (double x : positions) {
    FieldEstimate est;
    est.x = x;
    for (double t : sorted) {
      auto sample = echo_phase(probe(x, t, shots, child_seed(seed, job++)), shots);
      sample.hold = t;
      if (!est.samples.empty()) {
        const double prev = est.samples.back().phase;
        sample.phase += 2 * std::numbers::pi * std::round((prev - sample.phase) / (2 * std::numbers::pi));
      }
      est.samples.push_back(sample);
    }
    std::vector<double> tt, yy, ss;
    for (const auto& s : est.samples) {
      tt.push_back(s.hold);
      yy.push_back(s.phase);
      ss.push_back(s.sigma);
    }
    const auto fit = weighted_line_fit(tt, yy, ss);
    est.delta_b = fit.slope / units::kZeemanRate;
    est.sigma = fit.slope_sigma / units::kZeemanRate;
    est.phi0 = fit.intercept;
    est.phi0_sigma = fit.intercept_sigma;
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace ionswap

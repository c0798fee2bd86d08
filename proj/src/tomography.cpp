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

#include "ionswap/tomography.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "ionswap/errors.hpp"

namespace ionswap {

namespace {

constexpr double kPi = std::numbers::pi;

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

CMatrix2 single_pauli(int i) {
  switch (i) {
    case 0: return pauli::identity();
    case 1: return pauli::x();
    case 2: return pauli::y();
    default: return pauli::z();
  }
}

// Z eigenvalue of bit k (0 = down -> +1, 1 = up -> -1).
double z_value(std::size_t outcome, int qubit) {
  const std::size_t bit = qubit == 0 ? 2 : 1;
  return (outcome & bit) ? -1.0 : 1.0;
}

const std::vector<CMatrix>& paulis() {
  static const std::vector<CMatrix> basis = [] {
    std::vector<CMatrix> b;
    for (int m = 0; m < 16; ++m) b.push_back(kron(single_pauli(m / 4), single_pauli(m % 4)));
    return b;
  }();
  return basis;
}

}  // namespace

CMatrix2 preparation_pulse(int k) {
  switch (k) {
    case 0: return pauli::identity();
    case 1: return rotation(kPi / 2, 0);
    case 2: return rotation(kPi / 2, kPi / 2);
    case 3: return rotation(kPi, 0);
    default: throw ConfigError("preparation index must be 0..3");
  }
}

CMatrix2 analysis_pulse(int k) {
  switch (k) {
    case 0: return pauli::identity();
    case 1: return rotation(kPi / 2, 0);
    case 2: return rotation(kPi / 2, kPi / 2);
    default: throw ConfigError("analysis index must be 0..2");
  }
}

MeasuredPauli measured_pauli(int analysis) {
  const CMatrix2 u = analysis_pulse(analysis);
  const CMatrix2 h = u.adjoint() * pauli::z() * u;
  for (int i = 1; i <= 3; ++i) {
    const double overlap = 0.5 * (single_pauli(i).adjoint() * h).trace().real();
    if (std::abs(std::abs(overlap) - 1.0) < 1e-12) return {i, overlap > 0 ? 1.0 : -1.0};
  }
  throw ConfigError("analysis pulse does not map Z onto a Pauli axis");
}

CMatrix pauli_basis(int m) {
  if (m < 0 || m > 15) throw ConfigError("Pauli index must be 0..15");
  return paulis()[std::size_t(m)];
}

std::string pauli_label(int m) {
  static const char* names = "IXYZ";
  return {names[m / 4], names[m % 4]};
}

std::vector<CMatrix> preparation_states() {
  Eigen::Vector2cd up(0, 1);
  std::vector<CMatrix> out;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const Eigen::VectorXcd a = preparation_pulse(p) * up;
      const Eigen::VectorXcd b = preparation_pulse(q) * up;
      const CMatrix psi = kron(a, b);
      out.push_back(psi * psi.adjoint());
    }
  return out;
}

SettingProbabilities setting_probabilities(const CMatrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw ConfigError("expected a two-qubit state");
  SettingProbabilities out{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const CMatrix u = kron(analysis_pulse(a), analysis_pulse(b));
      const CMatrix r = u * rho * u.adjoint();
      for (int i = 0; i < 4; ++i) out[std::size_t(3 * a + b)][std::size_t(i)] = r(i, i).real();
    }
  return out;
}

CMatrix state_from_probabilities(const SettingProbabilities& p) {
  // T(i, j): expectation of sigma_i (x) sigma_j.
  Eigen::Matrix4d t = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d n = Eigen::Matrix4d::Zero();
  t(0, 0) = 1;
  n(0, 0) = 1;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const auto& q = p[std::size_t(3 * a + b)];
      const auto pa = measured_pauli(a), pb = measured_pauli(b);
      double za = 0, zb = 0, zz = 0;
      for (std::size_t o = 0; o < 4; ++o) {
        za += z_value(o, 0) * q[o];
        zb += z_value(o, 1) * q[o];
        zz += z_value(o, 0) * z_value(o, 1) * q[o];
      }
      t(pa.index, pb.index) += pa.sign * pb.sign * zz;
      n(pa.index, pb.index) += 1;
      t(pa.index, 0) += pa.sign * za;
      n(pa.index, 0) += 1;
      t(0, pb.index) += pb.sign * zb;
      n(0, pb.index) += 1;
    }
  CMatrix rho = CMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (n(i, j) == 0) throw ConfigError("tomography settings do not cover all correlators");
      rho += (t(i, j) / n(i, j)) * paulis()[std::size_t(4 * i + j)];
    }
  return 0.25 * rho;
}

CMatrix state_from_counts(const std::array<std::array<std::uint64_t, 4>, 9>& counts) {
  SettingProbabilities p{};
  for (std::size_t s = 0; s < 9; ++s) {
    std::uint64_t total = 0;
    for (auto c : counts[s]) total += c;
    if (total == 0) throw ConfigError("tomography setting " + std::to_string(s) + " has no shots");
    for (std::size_t o = 0; o < 4; ++o) p[s][o] = double(counts[s][o]) / double(total);
  }
  return state_from_probabilities(p);
}

Eigen::Matrix2cd single_state_from_probabilities(const std::array<std::array<double, 2>, 3>& p) {
  Eigen::Matrix2cd rho = pauli::identity();
  for (int a = 0; a < 3; ++a) {
    const auto mp = measured_pauli(a);
    rho += mp.sign * (p[std::size_t(a)][0] - p[std::size_t(a)][1]) * single_pauli(mp.index);
  }
  return 0.5 * rho;
}

CMatrix chi_from_states(const std::vector<CMatrix>& inputs, const std::vector<CMatrix>& outputs) {
  if (inputs.size() != outputs.size() || inputs.empty())
    throw ConfigError("need matching input and output state lists");
  const auto& p = paulis();
  const Eigen::Index rows = Eigen::Index(inputs.size()) * 16;
  CMatrix a(rows, 256);
  Eigen::VectorXcd b(rows);
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    if (inputs[j].rows() != 4 || outputs[j].rows() != 4) throw ConfigError("expected 4x4 states");
    for (int m = 0; m < 16; ++m) {
      const CMatrix left = p[std::size_t(m)] * inputs[j];
      for (int n = 0; n < 16; ++n) {
        const CMatrix term = left * p[std::size_t(n)].adjoint();
        for (int r = 0; r < 4; ++r)
          for (int c = 0; c < 4; ++c) a(Eigen::Index(j) * 16 + 4 * r + c, 16 * m + n) = term(r, c);
      }
    }
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) b(Eigen::Index(j) * 16 + 4 * r + c) = outputs[j](r, c);
  }
  Eigen::ColPivHouseholderQR<CMatrix> qr(a);
  if (qr.rank() < 256) throw ConfigError("preparation states do not span operator space");
  const Eigen::VectorXcd x = qr.solve(b);
  CMatrix chi(16, 16);
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n) chi(m, n) = x(16 * m + n);
  const Complex tr = chi.trace();
  if (std::abs(tr) < 1e-12) throw ConfigError("reconstructed process has zero trace");
  return chi / tr;
}

CMatrix swap_unitary() {
  CMatrix s = CMatrix::Zero(4, 4);
  s(0, 0) = s(3, 3) = 1.0;
  s(1, 2) = s(2, 1) = 1.0;
  return s;
}

CMatrix chi_of_unitary(const CMatrix& u) {
  if (u.rows() != 4 || u.cols() != 4) throw ConfigError("expected a 4x4 unitary");
  Eigen::VectorXcd c(16);
  for (int m = 0; m < 16; ++m) c[m] = (paulis()[std::size_t(m)].adjoint() * u).trace() / 4.0;
  return c * c.adjoint();
}

double process_fidelity(const CMatrix& chi_meas, const CMatrix& chi_ideal) {
  return (chi_meas.adjoint() * chi_ideal).trace().real();
}

double trace_preservation_residual(const CMatrix& chi) {
  const auto& p = paulis();
  CMatrix sum = CMatrix::Zero(4, 4);
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n)
      sum += chi(m, n) * p[std::size_t(n)].adjoint() * p[std::size_t(m)];
  // chi is trace-normalised to 1; a trace-preserving map gives 4 * I / 4.
  return (sum - CMatrix::Identity(4, 4)).norm();
}

CMatrix nearest_psd(const CMatrix& m) {
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  if (!(lam.sum() > 0)) throw ConfigError("matrix has no positive part");
  lam /= lam.sum();
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().adjoint();
}

// ---------------------------------------------------------------------------

CorrectedProbabilities readout_correct(const std::vector<double>& measured,
                                       const std::vector<std::string>& labels,
                                       const ReadoutModel& readout) {
  const std::size_t n = labels.size();
  if (measured.size() != (std::size_t{1} << n))
    throw ConfigError("probability vector does not match the number of qubits");
  std::vector<double> p = measured;
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Matrix2d c = readout.confusion(labels[k]);
    if (std::abs(c.determinant()) < 1e-12) throw ConfigError("confusion matrix is singular");
    const Eigen::Matrix2d inv = c.inverse();
    const std::size_t bit = std::size_t{1} << (n - 1 - k);
    std::vector<double> q(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i & bit) continue;
      const double lo = p[i], hi = p[i | bit];
      q[i] = inv(0, 0) * lo + inv(0, 1) * hi;
      q[i | bit] = inv(1, 0) * lo + inv(1, 1) * hi;
    }
    p = std::move(q);
  }
  CorrectedProbabilities out;
  out.inverse = p;
  out.clipped = p;
  double total = 0;
  for (double& v : out.clipped) {
    if (v < 0) {
      out.clip_mass -= v;
      v = 0;
    }
    total += v;
  }
  if (total > 0)
    for (double& v : out.clipped) v /= total;
  return out;
}

TruthTable truth_table(const std::vector<std::vector<double>>& histograms,
                       const std::vector<std::size_t>& expected) {
  if (histograms.empty() || histograms.size() != expected.size())
    throw ConfigError("truth table needs one histogram and one expected output per input");
  const auto cols = histograms.front().size();
  TruthTable t;
  t.table = Eigen::MatrixXd::Zero(Eigen::Index(histograms.size()), Eigen::Index(cols));
  t.expected = expected;
  for (std::size_t i = 0; i < histograms.size(); ++i) {
    if (histograms[i].size() != cols) throw ConfigError("ragged truth table");
    if (expected[i] >= cols) throw ConfigError("expected output out of range");
    double total = 0;
    for (double v : histograms[i]) total += v;
    if (!(total > 0)) throw ConfigError("truth table input " + std::to_string(i) + " is empty");
    for (std::size_t j = 0; j < cols; ++j) t.table(Eigen::Index(i), Eigen::Index(j)) = histograms[i][j] / total;
    t.mean_fidelity += t.table(Eigen::Index(i), Eigen::Index(expected[i]));
  }
  t.mean_fidelity /= double(histograms.size());
  return t;
}

void write_chi_csv(std::ostream& out, const CMatrix& chi) {
  out << std::setprecision(12) << "row,col,row_label,col_label,abs,phase\n";
  for (int m = 0; m < chi.rows(); ++m)
    for (int n = 0; n < chi.cols(); ++n)
      out << m << "," << n << "," << pauli_label(m) << "," << pauli_label(n) << ","
          << std::abs(chi(m, n)) << "," << std::arg(chi(m, n)) << "\n";
}

}  // namespace ionswap

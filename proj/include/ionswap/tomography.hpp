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

// Two-qubit state and process tomography by linear inversion, readout-error
// correction and truth tables.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ionswap/qubit.hpp"

namespace ionswap {

/// Pulses applied to a freshly pumped |up> ion to prepare the four inputs:
/// 0: none, 1: R_X(pi/2), 2: R_Y(pi/2), 3: R_X(pi).
CMatrix2 preparation_pulse(int k);
/// Analysis pulses before a Z readout: 0: none (Z), 1: R_X(pi/2), 2: R_Y(pi/2).
CMatrix2 analysis_pulse(int k);

/// Pauli operator measured by an analysis setting and its sign:
/// U^dagger Z U = sign * sigma_index (index 1..3 = X, Y, Z).
struct MeasuredPauli {
  int index = 3;
  double sign = 1;
};
MeasuredPauli measured_pauli(int analysis);

/// Two-qubit Pauli basis element 4a + b = sigma_a (x) sigma_b, a,b in I,X,Y,Z.
CMatrix pauli_basis(int m);
std::string pauli_label(int m);

/// The 16 product inputs, first qubit most significant: index 4p + q.
std::vector<CMatrix> preparation_states();

/// Outcome distributions (joint index 0..3) for the 9 analysis settings,
/// indexed 3a + b.
using SettingProbabilities = std::array<std::array<double, 4>, 9>;

/// Exact outcome distributions for a state.
SettingProbabilities setting_probabilities(const CMatrix& rho);

/// Linear inversion: rho = 1/4 sum T_ij sigma_i (x) sigma_j. Correlators with
/// an identity factor are averaged over the three settings that contain them.
CMatrix state_from_probabilities(const SettingProbabilities& p);
/// Frequencies from counts. Throws ConfigError for a setting with no shots.
CMatrix state_from_counts(const std::array<std::array<std::uint64_t, 4>, 9>& counts);

/// Single-qubit version; settings indexed by analysis pulse.
Eigen::Matrix2cd single_state_from_probabilities(const std::array<std::array<double, 2>, 3>& p);

/// Solves E(rho_j) = sum chi_mn P_m rho_j P_n^dagger and normalises Tr chi = 1.
/// Throws ConfigError if the inputs do not span operator space.
CMatrix chi_from_states(const std::vector<CMatrix>& inputs, const std::vector<CMatrix>& outputs);

/// chi of rho -> U rho U^dagger.
CMatrix chi_of_unitary(const CMatrix& u);
CMatrix swap_unitary();

/// Re Tr(chi_meas^dagger chi_ideal).
double process_fidelity(const CMatrix& chi_meas, const CMatrix& chi_ideal);
/// || sum chi_mn P_n^dagger P_m - I ||_F.
double trace_preservation_residual(const CMatrix& chi);
/// Nearest positive semidefinite matrix with unit trace (eigenvalue clipping).
CMatrix nearest_psd(const CMatrix& m);

// ---------------------------------------------------------------------------

struct CorrectedProbabilities {
  std::vector<double> inverse;  // unconstrained linear inverse, sums to 1
  std::vector<double> clipped;  // negatives set to 0 then renormalised
  double clip_mass = 0;         // total negative mass removed
};

/// Applies the inverse tensor-product confusion matrix for `labels` (first
/// label most significant). Throws ConfigError for a singular confusion matrix.
CorrectedProbabilities readout_correct(const std::vector<double>& measured,
                                       const std::vector<std::string>& labels,
                                       const ReadoutModel& readout);

// ---------------------------------------------------------------------------

struct TruthTable {
  Eigen::MatrixXd table;              // rows: inputs, columns: outputs
  std::vector<std::size_t> expected;  // ideal output per input
  double mean_fidelity = 0;
};

/// Rows normalised per input. Throws ConfigError for an empty row or size mismatch.
TruthTable truth_table(const std::vector<std::vector<double>>& histograms,
                       const std::vector<std::size_t>& expected);

/// Bar-chart table: row, col, labels, |chi|, arg chi.
void write_chi_csv(std::ostream& out, const CMatrix& chi);

}  // namespace ionswap

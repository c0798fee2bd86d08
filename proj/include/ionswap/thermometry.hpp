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

// Sideband and carrier Rabi flopping models and phonon-number fits.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ionswap {

enum class Transition { carrier, rsb, bsb };
enum class MotionalState { coherent, thermal };

std::string to_string(Transition t);
Transition parse_transition(const std::string& s);
std::string to_string(MotionalState s);
MotionalState parse_motional_state(const std::string& s);

struct RabiParams {
  double eta = 0.1;     // Lamb-Dicke parameter, must be < 0.3
  double omega0 = 1.0;  // carrier Rabi frequency, rad/us
  double decay = 0;     // contrast decay rate, 1/us (0 = off)
  int ions = 1;         // 2: probability that at least one ion flipped
};

/// Fock populations truncated once the remaining tail is below `tail`.
std::vector<double> phonon_distribution(MotionalState state, double nbar, double tail = 1e-8);

double rabi_frequency(Transition t, int n, double eta, double omega0);

/// Flip probability after a pulse of length t (us).
double rabi_model(MotionalState state, double nbar, const RabiParams& params, Transition t,
                  double time_us);

struct RabiDataset {
  Transition transition = Transition::bsb;
  std::string mode;
  std::vector<double> times;  // us
  std::vector<double> probabilities;
  std::vector<std::uint64_t> shots;

  std::size_t size() const { return times.size(); }
  void validate() const;
};

/// Binomially sampled synthetic data.
RabiDataset synthesize_rabi(MotionalState state, double nbar, const RabiParams& params,
                            Transition t, std::span<const double> times, std::uint64_t shots,
                            std::uint64_t seed, const std::string& mode = "");

/// CSV with columns t_us,probability,shots[,transition[,mode]]; rows are grouped
/// by (transition, mode). Missing transition column uses `fallback`.
std::vector<RabiDataset> read_rabi_csv(std::istream& in, Transition fallback = Transition::bsb);
void write_rabi_csv(std::ostream& out, std::span<const RabiDataset> data);

struct FitOptions {
  MotionalState model = MotionalState::coherent;
  int ions = 1;
  double eta = 0.1;       // fixed unless a carrier dataset is present
  double omega0 = 0;      // initial guess; 0 = scan
  bool fit_decay = false;
  double nbar_max = 10;
  int bootstrap = 200;
  double confidence = 0.95;
  std::uint64_t seed = 1;
};

struct FitResult {
  MotionalState model = MotionalState::coherent;
  double nbar = 0;
  double alpha = 0;  // sqrt(nbar)
  double omega0 = 0;
  double eta = 0;
  double decay = 0;
  double chi2 = 0;
  int dof = 0;
  double ci_low = 0;
  double ci_high = 0;
  double nbar_std = 0;  // bootstrap standard deviation
  int evaluations = 0;
  bool eta_fitted = false;
};

/// Weighted least squares over all datasets with shared omega0 and eta,
/// plus a seeded bootstrap for the n-bar interval. Throws FitError.
FitResult fit_phonon_number(std::span<const RabiDataset> data, const FitOptions& options);

}  // namespace ionswap

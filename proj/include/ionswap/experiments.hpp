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


// Study drivers shared by the command-line tool, the acceptance checks and
// the Python module. Settings fan out over a worker pool; every setting draws
// from its own child seed, so results do not depend on the worker count.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ionswap/crystal.hpp"
#include "ionswap/qubit.hpp"
#include "ionswap/sequence.hpp"
#include "ionswap/tomography.hpp"

namespace ionswap {

/// Calls fn(i) for i in [0, n) on up to `workers` threads. The exception of
/// the lowest failing index is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Two-qubit process tomography

inline constexpr std::size_t kTomographySettings = 144;

/// Setting index = 9 * (4 p + q) + (3 a + b): preparation p (left ion), q
/// (right ion), analysis a (left), b (right).
struct TomographySetting {
  int prep_left = 0, prep_right = 0, analysis_left = 0, analysis_right = 0;
  static TomographySetting from_index(std::size_t index);
  std::size_t index() const;
};

struct TomographyOptions {
  std::size_t shots = 1000;
  bool include_swap = true;
  ReadoutModel readout;
  RunMode mode = RunMode::logical;
  std::uint64_t seed = 1;
  int workers = 1;
};

/// counts[setting][outcome], outcome bits in left-right order.
using TomographyCounts = std::vector<std::vector<std::uint64_t>>;

struct TomographyAnalysis {
  std::vector<CMatrix> states_raw;        // 16 output states
  std::vector<CMatrix> states_corrected;  // after inverse readout correction
  CMatrix chi_raw, chi_corrected, chi_ideal;
  double fidelity_raw = 0;
  double fidelity_corrected = 0;
  double trace_residual_raw = 0;
  double trace_residual_corrected = 0;
  double clip_mass = 0;  // summed over settings, diagnostic only
};

/// Linear inversion of the 144 histograms against SWAP (or identity).
TomographyAnalysis analyze_tomography(const TomographyCounts& counts, const ReadoutModel& readout,
                                      bool include_swap);

struct TomographyRun {
  TomographyCounts counts;
  TomographyAnalysis analysis;
  SequenceReport example_report;  // setting 0
};

/// Throws PhysicsError if any dynamical setting aborts.
TomographyRun run_tomography(const World& world, const TomographyOptions& options);

// ---------------------------------------------------------------------------
// Three-ion reorder truth table

struct ReorderOptions {
  std::size_t shots = 2500;
  ReadoutModel readout;
  double loading_bias = 0;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct ReorderRun {
  std::vector<std::string> inputs;   // "000".."111", A B C
  std::vector<std::string> outputs;  // readout columns, labels in spatial order
  TomographyCounts counts;           // [input][outcome]
  TruthTable raw;
  TruthTable corrected;  // unclipped inverse: unbiased fidelity, entries may dip below 0
  TruthTable clipped;    // physical table after clipping
  double clip_mass = 0;
  SequenceReport report;  // input 0
};

ReorderRun run_reorder(const World& world, const ReorderOptions& options);

// ---------------------------------------------------------------------------
// Field map

struct FieldMapOptions {
  std::vector<int> segments{18, 19, 20, 21, 22};
  std::vector<double> holds{0, 50, 100, 150, 200};
  std::size_t shots = 2000;
  ReadoutModel readout;
  std::uint64_t seed = 1;
};

struct FieldMapRun {
  std::vector<FieldEstimate> estimates;
  std::vector<double> injected;  // delta_b at each probed position
};

FieldMapRun run_field_map(const World& world, const FieldMapOptions& options);

// ---------------------------------------------------------------------------
// Swap studies

struct SwapStudyPoint {
  double programmed_us = 0;
  double effective_us = 0;  // 1 % filtered activity window
  SwapSimulation simulation;
};

std::vector<SwapStudyPoint> swap_duration_sweep(const TrapModel& model, SwapRampParams params,
                                                const std::vector<double>& durations,
                                                const FilterModel& filter, const IntegrationOptions& opts,
                                                int workers = 1);

/// Length of the 1 % filtered activity window of a programmed swap.
double effective_swap_duration(const SwapRampParams& params, const FilterModel& filter);

struct SwapOptimizeOptions {
  std::vector<std::string> parameters{"u_d_peak"};
  std::vector<double> lower{0.0};
  std::vector<double> upper{5.0};
  int max_evaluations = 60;
  int restarts = 1;
  std::uint64_t seed = 1;
  std::function<void(const IterationLog&)> on_iteration;
};

struct SwapOptimizeRun {
  SwapOptimization optimum;
  SwapSimulation simulation;  // at the optimum
};

/// Minimises the max-over-modes n-bar of the filtered swap.
SwapOptimizeRun optimize_swap(const TrapModel& model, const SwapRampParams& start, const FilterModel& filter,
                              const IntegrationOptions& opts, const SwapOptimizeOptions& options);

}  // namespace ionswap

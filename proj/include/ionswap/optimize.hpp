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

// Derivative-free Nelder-Mead simplex search with box clipping and seeded
// restarts. Objectives must be re-entrant when `workers > 1`.

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ionswap {

struct IterationLog {
  int iteration = 0;
  int evaluations = 0;
  int restart = 0;
  double best_value = 0;
  std::vector<double> best_x;
  std::string step;  // reflect, expand, contract, shrink, restart
};

struct NelderMeadOptions {
  std::vector<double> lower;         // empty = unbounded
  std::vector<double> upper;
  std::vector<double> initial_step;  // empty = 10% of |x0| (or 0.1)
  int max_evaluations = 2000;
  double x_tolerance = 1e-9;
  double f_tolerance = 1e-14;
  int restarts = 2;
  std::uint64_t seed = 1;
  int workers = 1;
  /// Stop immediately if the objective reaches this value.
  double target = -std::numeric_limits<double>::infinity();
  std::function<void(const IterationLog&)> on_iteration;
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0;
  double initial_value = 0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Never returns a point worse than `x0`; ties keep `x0`.
OptimizeResult nelder_mead(const Objective& objective, std::vector<double> x0,
                           const NelderMeadOptions& options = {});

}  // namespace ionswap

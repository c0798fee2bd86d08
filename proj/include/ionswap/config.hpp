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


// Run configuration: one JSON tree covering the trap, waveforms, noise and
// per-study settings. Unknown keys are errors.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ionswap/io.hpp"

namespace ionswap {

struct TomographyStudy {
  std::size_t shots = 1000;
  bool include_swap = true;
  RunMode mode = RunMode::logical;
  bool nearest_psd = false;  // also report the PSD-projected chi
};

struct ReorderStudy {
  std::size_t shots = 2500;
  double loading_bias = 0;
};

struct FieldMapStudy {
  std::vector<int> segments{18, 19, 20, 21, 22};
  std::vector<double> holds{0, 50, 100, 150, 200};  // us
  std::size_t shots = 2000;
};

struct SwapStudy {
  std::vector<double> durations{22, 44, 88, 176};  // programmed T, us
};

struct OptimizeStudy {
  std::vector<std::string> parameters{"u_d_peak"};
  std::vector<double> lower{0.0};
  std::vector<double> upper{5.0};
  int max_evaluations = 60;
  int restarts = 1;
};

struct RabiStudy {
  std::string data;  // CSV path, resolved against the config directory
  std::string transition = "bsb";  // for files without a transition column
  FitOptions fit;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::string out = "out";

  TrapGeometry trap;
  bool calibrate = true;
  CalibrationTargets calibration;
  FilterModel filter;
  SwapRampParams swap;
  TransportParams transport;
  SeparationParams separation;
  double dynamical_separation_duration = 800;  // us; see README
  IntegrationOptions integration;
  LaserTiming laser;
  SequenceNoise noise;
  ReadoutModel readout;
  FieldSpec field;

  TomographyStudy tomography;
  ReorderStudy reorder;
  FieldMapStudy field_map;
  SwapStudy swap_study;
  OptimizeStudy optimize;
  RabiStudy rabi;

  /// Directory relative paths are resolved against; not part of the hash.
  std::string base_dir = ".";

  /// Throws ConfigError unless a seed was given.
  std::uint64_t require_seed() const;
  /// Geometry after optional calibration.
  TrapGeometry geometry() const;
  /// World for `mode`; dynamical mode needs `model`.
  World world(const TrapModel* model, RunMode mode) const;
  std::string resolve(const std::string& path) const;
};

RunConfig config_from_json(const Json& j, const std::string& base_dir = ".");
/// Empty path gives the defaults.
RunConfig read_config(const std::string& path);
/// Every field, defaults included.
Json to_json_tree(const RunConfig& c);
/// FNV-1a of the canonical tree without seed, out and base_dir.
std::uint64_t config_hash(const RunConfig& c);

}  // namespace ionswap

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


#include "ionswap/config.hpp"

#include <algorithm>
#include <filesystem>

#include "ionswap/errors.hpp"

namespace ionswap {

namespace {

template <class T>
void take(const Json& j, const char* key, T& out, const std::string& what) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(what + "." + key + ": " + e.what());
  }
}

void check_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + what);
  }
}

}  // namespace

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw ConfigError("this command is stochastic: give a seed in the config or with --seed");
  return *seed;
}

TrapGeometry RunConfig::geometry() const { return calibrate ? ionswap::calibrate(calibration, trap) : trap; }

World RunConfig::world(const TrapModel* model, RunMode mode) const {
  if (mode == RunMode::dynamical && !model) throw ConfigError("dynamical mode needs a trap model");
  World w;
  w.model = model;
  w.geometry = model ? model->geometry() : geometry();
  w.field = field.map();
  w.noise = noise;
  w.laser = laser;
  w.transport = transport;
  w.separation = separation;
  if (mode == RunMode::dynamical) w.separation.duration = dynamical_separation_duration;
  w.swap = swap;
  w.filter = filter;
  w.integration = integration;
  return w;
}

std::string RunConfig::resolve(const std::string& path) const {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
}

RunConfig config_from_json(const Json& j, const std::string& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  check_keys(j,
             {"seed", "out", "trap", "calibrate", "calibration", "filter", "swap", "transport", "separation",
              "dynamical_separation_duration", "integration", "laser", "noise", "readout", "field", "tomography",
              "reorder", "field_map", "swap_study", "optimize", "rabi"},
             "config");
  const std::string w = "config";
  if (j.contains("seed")) {
    std::uint64_t s = 0;
    take(j, "seed", s, w);
    c.seed = s;
  }
  take(j, "out", c.out, w);
  take(j, "trap", c.trap, w);
  take(j, "calibrate", c.calibrate, w);
  take(j, "calibration", c.calibration, w);
  take(j, "filter", c.filter, w);
  take(j, "swap", c.swap, w);
  take(j, "transport", c.transport, w);
  take(j, "separation", c.separation, w);
  take(j, "dynamical_separation_duration", c.dynamical_separation_duration, w);
  take(j, "integration", c.integration, w);
  take(j, "laser", c.laser, w);
  take(j, "noise", c.noise, w);
  take(j, "readout", c.readout, w);
  take(j, "field", c.field, w);

  if (const auto it = j.find("tomography"); it != j.end()) {
    check_keys(*it, {"shots", "include_swap", "mode", "nearest_psd"}, "tomography");
    std::string mode = to_string(c.tomography.mode);
    take(*it, "shots", c.tomography.shots, "tomography");
    take(*it, "include_swap", c.tomography.include_swap, "tomography");
    take(*it, "mode", mode, "tomography");
    take(*it, "nearest_psd", c.tomography.nearest_psd, "tomography");
    c.tomography.mode = parse_run_mode(mode);
  }
  if (const auto it = j.find("reorder"); it != j.end()) {
    check_keys(*it, {"shots", "loading_bias"}, "reorder");
    take(*it, "shots", c.reorder.shots, "reorder");
    take(*it, "loading_bias", c.reorder.loading_bias, "reorder");
  }
  if (const auto it = j.find("field_map"); it != j.end()) {
    check_keys(*it, {"segments", "holds", "shots"}, "field_map");
    take(*it, "segments", c.field_map.segments, "field_map");
    take(*it, "holds", c.field_map.holds, "field_map");
    take(*it, "shots", c.field_map.shots, "field_map");
  }
  if (const auto it = j.find("swap_study"); it != j.end()) {
    check_keys(*it, {"durations"}, "swap_study");
    take(*it, "durations", c.swap_study.durations, "swap_study");
  }
  if (const auto it = j.find("optimize"); it != j.end()) {
    check_keys(*it, {"parameters", "lower", "upper", "max_evaluations", "restarts"}, "optimize");
    take(*it, "parameters", c.optimize.parameters, "optimize");
    take(*it, "lower", c.optimize.lower, "optimize");
    take(*it, "upper", c.optimize.upper, "optimize");
    take(*it, "max_evaluations", c.optimize.max_evaluations, "optimize");
    take(*it, "restarts", c.optimize.restarts, "optimize");
  }
  if (const auto it = j.find("rabi"); it != j.end()) {
    check_keys(*it, {"data", "transition", "fit"}, "rabi");
    take(*it, "data", c.rabi.data, "rabi");
    take(*it, "transition", c.rabi.transition, "rabi");
    take(*it, "fit", c.rabi.fit, "rabi");
    parse_transition(c.rabi.transition);
  }

  // Cross-field checks.
  if (c.tomography.shots == 0 || c.reorder.shots == 0 || c.field_map.shots == 0)
    throw ConfigError("shot counts must be positive");
  if (c.optimize.lower.size() != c.optimize.parameters.size() ||
      c.optimize.upper.size() != c.optimize.parameters.size())
    throw ConfigError("optimize.lower/upper must match optimize.parameters");
  const auto known = swap_parameter_names();
  for (const auto& name : c.optimize.parameters)
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ConfigError("unknown optimize parameter '" + name + "'");
  if (c.swap_study.durations.empty()) throw ConfigError("swap_study.durations is empty");
  if (c.field_map.holds.size() < 3) throw ConfigError("field_map needs at least three hold times");
  if (!(c.dynamical_separation_duration > 0)) throw ConfigError("dynamical_separation_duration must be positive");
  const auto& g = c.trap;
  for (int s : c.field_map.segments)
    if (!g.has_segment(s)) throw ConfigError("field_map segment " + std::to_string(s) + " is outside the trap");
  if (!c.rabi.data.empty() && !std::filesystem::exists(c.resolve(c.rabi.data)))
    throw ConfigError("rabi.data file not found: " + c.resolve(c.rabi.data));
  return c;
}

RunConfig read_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  const auto dir = std::filesystem::path(path).parent_path().string();
  return config_from_json(read_json_file(path), dir.empty() ? "." : dir);
}

Json to_json_tree(const RunConfig& c) {
  Json j = {{"out", c.out},
            {"trap", c.trap},
            {"calibrate", c.calibrate},
            {"calibration", c.calibration},
            {"filter", c.filter},
            {"swap", c.swap},
            {"transport", c.transport},
            {"separation", c.separation},
            {"dynamical_separation_duration", c.dynamical_separation_duration},
            {"integration", c.integration},
            {"laser", c.laser},
            {"noise", c.noise},
            {"readout", c.readout},
            {"field", c.field},
            {"tomography",
             {{"shots", c.tomography.shots},
              {"include_swap", c.tomography.include_swap},
              {"mode", to_string(c.tomography.mode)},
              {"nearest_psd", c.tomography.nearest_psd}}},
            {"reorder", {{"shots", c.reorder.shots}, {"loading_bias", c.reorder.loading_bias}}},
            {"field_map",
             {{"segments", c.field_map.segments}, {"holds", c.field_map.holds}, {"shots", c.field_map.shots}}},
            {"swap_study", {{"durations", c.swap_study.durations}}},
            {"optimize",
             {{"parameters", c.optimize.parameters},
              {"lower", c.optimize.lower},
              {"upper", c.optimize.upper},
              {"max_evaluations", c.optimize.max_evaluations},
              {"restarts", c.optimize.restarts}}},
            {"rabi", {{"data", c.rabi.data}, {"transition", c.rabi.transition}, {"fit", c.rabi.fit}}}};
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

std::uint64_t config_hash(const RunConfig& c) {
  Json j = to_json_tree(c);
  j.erase("seed");
  j.erase("out");
  return fnv1a64(j.dump());
}

}  // namespace ionswap

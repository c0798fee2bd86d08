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


// ionswap: command-line front end for the simulation and analysis studies.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ionswap/config.hpp"
#include "ionswap/errors.hpp"
#include "ionswap/experiments.hpp"

namespace fs = std::filesystem;
using namespace ionswap;

namespace {

enum class Format { json, csv };

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int workers = 1;
  Format format = Format::json;
  bool quiet = false;
};

/// Loaded config plus the output directory and provenance header.
class Context {
 public:
  Context(const Flags& flags, std::string command) : flags_(flags), command_(std::move(command)) {
    cfg_ = read_config(flags.config);
    if (flags.seed) cfg_.seed = flags.seed;
    out_dir_ = flags.out.empty() ? cfg_.out : flags.out;
    hash_ = hash_hex(config_hash(cfg_));
  }

  const RunConfig& config() const { return cfg_; }
  RunConfig& config() { return cfg_; }
  int workers() const { return flags_.workers; }
  Format format() const { return flags_.format; }

  Json meta() const {
    Json m = {{"command", command_}, {"config_hash", hash_}};
    m["seed"] = cfg_.seed ? Json(*cfg_.seed) : Json(nullptr);
    return m;
  }

  std::string path(const std::string& name) const {
    fs::create_directories(out_dir_);
    return (fs::path(out_dir_) / name).string();
  }

  void write_json(const std::string& name, Json body) const {
    body["meta"] = meta();
    write_json_file(path(name), body);
    if (!flags_.quiet) std::cout << "wrote " << path(name) << "\n";
  }

  /// CSV with a provenance comment line.
  std::ofstream open_csv(const std::string& name) const {
    std::ofstream f(path(name));
    if (!f) throw ConfigError("cannot write " + path(name));
    f << "# config_hash=" << hash_ << " seed=" << (cfg_.seed ? std::to_string(*cfg_.seed) : "none") << "\n";
    if (!flags_.quiet) std::cout << "wrote " << path(name) << "\n";
    return f;
  }

  void summary(const Json& j) const {
    if (!flags_.quiet) std::cout << j.dump(2) << "\n";
  }

 private:
  Flags flags_;
  std::string command_;
  RunConfig cfg_;
  std::string out_dir_;
  std::string hash_;
};

Json geometry_frequencies(const TrapModel& model, double u_c) {
  const int liz = model.geometry().liz_segment;
  const auto f = single_ion_frequencies(model, model.dense(single_well(liz, u_c)), Vec3(model.geometry().center(liz), 0, 0));
  return {{"axial_mhz", f.axial_mhz}, {"radial_low_mhz", f.radial_low_mhz}, {"radial_high_mhz", f.radial_high_mhz}};
}

// ---------------------------------------------------------------------------

void cmd_calibrate(Context& ctx) {
  const auto& c = ctx.config();
  const TrapGeometry g = ionswap::calibrate(c.calibration, c.trap);
  const TrapModel model(g);
  const Json freq = geometry_frequencies(model, c.calibration.u_c);
  ctx.write_json("geometry.json", {{"geometry", g}, {"targets", c.calibration}, {"frequencies", freq}});
  ctx.summary(freq);
}

void cmd_modes(Context& ctx) {
  const auto& c = ctx.config();
  const TrapModel model(c.geometry());
  const int liz = model.geometry().liz_segment;
  const auto v = model.dense(single_well(liz, c.calibration.u_c));
  const ElectrodePotential field(model, v);
  const double x0 = model.geometry().center(liz);
  const auto single = single_ion_frequencies(model, v, Vec3(x0, 0, 0));
  const ModeSet modes = normal_modes(field, find_equilibrium(field, linear_guess(field, 2, x0)));

  const double fz = single.axial_mhz, fl = single.radial_low_mhz, fh = single.radial_high_mhz;
  const std::map<std::string, double> analytic{
      {"axial-COM", fz},
      {"axial-stretch", std::sqrt(3.0) * fz},
      {"radial-COM-low", fl},
      {"radial-rocking-low", std::sqrt(fl * fl - fz * fz)},
      {"radial-COM-high", fh},
      {"radial-rocking-high", std::sqrt(fh * fh - fz * fz)}};

  Json table = Json::array();
  double worst = 0;
  for (const auto& m : modes.modes) {
    const auto it = analytic.find(m.label);
    Json row = {{"label", m.label}, {"mhz", m.mhz}};
    if (it != analytic.end()) {
      const double rel = std::abs(m.mhz - it->second) / it->second;
      worst = std::max(worst, rel);
      row["analytic_mhz"] = it->second;
      row["relative_error"] = rel;
    }
    table.push_back(row);
  }
  const Json checks = {{"stretch_over_com", modes.mode("axial-stretch").mhz / modes.mode("axial-COM").mhz},
                       {"sqrt3", std::sqrt(3.0)},
                       {"max_relative_error", worst}};
  ctx.write_json("modes.json", {{"single_ion", {{"axial_mhz", fz}, {"radial_low_mhz", fl}, {"radial_high_mhz", fh}}},
                                {"modes", table},
                                {"checks", checks},
                                {"equilibrium", modes}});
  if (ctx.format() == Format::csv) {
    auto f = ctx.open_csv("modes.csv");
    f << "label,mhz,analytic_mhz,relative_error\n";
    for (const auto& r : table)
      f << r["label"].get<std::string>() << "," << r["mhz"].get<double>() << ","
        << r.value("analytic_mhz", 0.0) << "," << r.value("relative_error", 0.0) << "\n";
  }
  ctx.summary({{"modes", table}, {"checks", checks}});
}

Json swap_point_json(const SwapStudyPoint& p) {
  return {{"programmed_us", p.programmed_us},
          {"effective_us", p.effective_us},
          {"swapped", p.simulation.swapped},
          {"max_nbar", p.simulation.excitation.max_nbar()},
          {"max_radial_um", p.simulation.max_radial},
          {"modes", p.simulation.excitation}};
}

void cmd_swap(Context& ctx, bool sweep) {
  const auto& c = ctx.config();
  const TrapModel model(c.geometry());
  IntegrationOptions opts = c.integration;
  opts.stride = 0;
  const std::vector<double> durations = sweep ? c.swap_study.durations : std::vector<double>{c.swap.duration};
  const auto points = swap_duration_sweep(model, c.swap, durations, c.filter, opts, ctx.workers());
  Json rows = Json::array();
  for (const auto& p : points) rows.push_back(swap_point_json(p));
  ctx.write_json("swap.json", {{"params", c.swap}, {"points", rows}});
  if (ctx.format() == Format::csv) {
    auto f = ctx.open_csv("swap.csv");
    f << "programmed_us,effective_us,swapped,mode,mhz,nbar\n";
    for (const auto& p : points)
      for (const auto& m : p.simulation.excitation.modes)
        f << p.programmed_us << "," << p.effective_us << "," << int(p.simulation.swapped) << "," << m.label << ","
          << m.mhz << "," << m.nbar << "\n";
  }
  Json brief = Json::array();
  for (const auto& r : rows)
    brief.push_back({{"programmed_us", r["programmed_us"]}, {"max_nbar", r["max_nbar"]}, {"swapped", r["swapped"]}});
  ctx.summary(brief);
}

void cmd_optimize_swap(Context& ctx) {
  const auto& c = ctx.config();
  const TrapModel model(c.geometry());
  SwapOptimizeOptions o;
  o.parameters = c.optimize.parameters;
  o.lower = c.optimize.lower;
  o.upper = c.optimize.upper;
  o.max_evaluations = c.optimize.max_evaluations;
  o.restarts = c.optimize.restarts;
  o.seed = c.seed.value_or(1);
  std::ofstream log(ctx.path("optimize_log.jsonl"));
  o.on_iteration = [&](const IterationLog& it) { log << Json(it).dump() << "\n"; };
  const auto run = optimize_swap(model, c.swap, c.filter, c.integration, o);
  log.close();
  ctx.write_json("optimize.json", {{"parameters", o.parameters},
                                   {"params", run.optimum.params},
                                   {"max_nbar", run.optimum.value},
                                   {"initial_max_nbar", run.optimum.initial_value},
                                   {"evaluations", run.optimum.evaluations},
                                   {"swapped", run.simulation.swapped},
                                   {"modes", run.simulation.excitation}});
  ctx.summary({{"params", run.optimum.params},
               {"max_nbar", run.optimum.value},
               {"initial_max_nbar", run.optimum.initial_value},
               {"evaluations", run.optimum.evaluations}});
}

void cmd_tomography(Context& ctx) {
  const auto& c = ctx.config();
  TomographyOptions o;
  o.shots = c.tomography.shots;
  o.include_swap = c.tomography.include_swap;
  o.mode = c.tomography.mode;
  o.readout = c.readout;
  o.seed = c.require_seed();
  o.workers = ctx.workers();
  std::optional<TrapModel> model;
  if (o.mode == RunMode::dynamical) model.emplace(c.geometry());
  const World world = c.world(model ? &*model : nullptr, o.mode);
  const auto run = run_tomography(world, o);
  const auto& a = run.analysis;

  Json body = {{"settings", kTomographySettings},
               {"shots_per_setting", o.shots},
               {"include_swap", o.include_swap},
               {"mode", to_string(o.mode)},
               {"fidelity_raw", a.fidelity_raw},
               {"fidelity_corrected", a.fidelity_corrected},
               {"trace_residual_raw", a.trace_residual_raw},
               {"trace_residual_corrected", a.trace_residual_corrected},
               {"clip_mass", a.clip_mass},
               {"chi_raw", chi_to_json(a.chi_raw)},
               {"chi_corrected", chi_to_json(a.chi_corrected)},
               {"chi_ideal", chi_to_json(a.chi_ideal)},
               {"sequence", run.example_report}};
  if (c.tomography.nearest_psd) {
    const CMatrix psd = nearest_psd(a.chi_corrected);
    body["chi_corrected_psd"] = chi_to_json(psd);
    body["fidelity_corrected_psd"] = process_fidelity(psd, a.chi_ideal);
  }
  ctx.write_json("tomography.json", body);
  {
    std::ofstream f(ctx.path("chi_corrected.csv"));
    write_chi_csv(f, a.chi_corrected);
  }
  {
    std::vector<ShotRow> rows;
    for (std::size_t s = 0; s < run.counts.size(); ++s) {
      auto r = shot_rows(s, run.counts[s], 2);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    std::ofstream f(ctx.path("shots.csv"));
    write_shot_csv(f, rows);
  }
  ctx.summary({{"fidelity_raw", a.fidelity_raw},
               {"fidelity_corrected", a.fidelity_corrected},
               {"clip_mass", a.clip_mass}});
}

void cmd_reorder(Context& ctx) {
  const auto& c = ctx.config();
  ReorderOptions o;
  o.shots = c.reorder.shots;
  o.loading_bias = c.reorder.loading_bias;
  o.readout = c.readout;
  o.seed = c.require_seed();
  o.workers = ctx.workers();
  const auto run = run_reorder(c.world(nullptr, RunMode::logical), o);
  const Json body = {{"inputs", run.inputs},
                     {"outputs", run.outputs},
                     {"counts", run.counts},
                     {"raw", run.raw},
                     {"corrected", run.corrected},
                     {"clipped", run.clipped},
                     {"clip_mass", run.clip_mass},
                     {"final_order", run.report.final_order()},
                     {"sequence", run.report}};
  ctx.write_json("reorder.json", body);
  if (ctx.format() == Format::csv) {
    auto f = ctx.open_csv("truth_table.csv");
    f << "input";
    for (const auto& o2 : run.outputs) f << "," << o2;
    f << "\n";
    for (std::size_t i = 0; i < run.inputs.size(); ++i) {
      f << run.inputs[i];
      for (Eigen::Index k = 0; k < run.clipped.table.cols(); ++k) f << "," << run.clipped.table(Eigen::Index(i), k);
      f << "\n";
    }
  }
  std::ofstream tl(ctx.path("timeline.txt"));
  write_timeline(tl, run.report);
  ctx.summary({{"fidelity_raw", run.raw.mean_fidelity},
               {"fidelity_corrected", run.corrected.mean_fidelity},
               {"counts", body["sequence"]["counts"]},
               {"duration_us", run.report.duration_us},
               {"shuttling_fraction", run.report.shuttling_fraction()}});
}

void cmd_field_map(Context& ctx) {
  const auto& c = ctx.config();
  FieldMapOptions o;
  o.segments = c.field_map.segments;
  o.holds = c.field_map.holds;
  o.shots = c.field_map.shots;
  o.readout = c.readout;
  o.seed = c.require_seed();
  const auto run = run_field_map(c.world(nullptr, RunMode::logical), o);
  Json rows = Json::array();
  for (std::size_t i = 0; i < run.estimates.size(); ++i) {
    Json r = run.estimates[i];
    r["injected_delta_b"] = run.injected[i];
    r["pull"] = (run.estimates[i].delta_b - run.injected[i]) / run.estimates[i].sigma;
    rows.push_back(r);
  }
  ctx.write_json("field_map.json", {{"field", c.field}, {"positions", rows}});
  if (ctx.format() == Format::csv) {
    auto f = ctx.open_csv("field_map.csv");
    f << "x_um,delta_b,sigma,injected_delta_b\n";
    for (std::size_t i = 0; i < run.estimates.size(); ++i)
      f << run.estimates[i].x << "," << run.estimates[i].delta_b << "," << run.estimates[i].sigma << ","
        << run.injected[i] << "\n";
  }
  Json brief = Json::array();
  for (const auto& r : rows)
    brief.push_back({{"x_um", r["x_um"]}, {"delta_b", r["delta_b"]}, {"injected", r["injected_delta_b"]}, {"pull", r["pull"]}});
  ctx.summary(brief);
}

void cmd_rabi_fit(Context& ctx, const std::string& data_flag) {
  auto& c = ctx.config();
  const std::string data = data_flag.empty() ? c.resolve(c.rabi.data) : data_flag;
  if (data.empty()) throw ConfigError("no Rabi data: set rabi.data or pass --data");
  std::ifstream in(data);
  if (!in) throw ConfigError("cannot open " + data);
  const auto sets = read_rabi_csv(in, parse_transition(c.rabi.transition));
  FitOptions fit = c.rabi.fit;
  fit.seed = c.require_seed();
  const FitResult r = fit_phonon_number(sets, fit);
  ctx.write_json("rabi_fit.json", {{"data", data}, {"datasets", sets.size()}, {"fit", r}});
  ctx.summary(r);
}

void cmd_sequence(Context& ctx, const std::string& file, const std::string& builtin, RunMode mode) {
  const auto& c = ctx.config();
  Sequence seq;
  if (!file.empty()) {
    seq = read_json_file(file).get<Sequence>();
  } else if (builtin == "reorder") {
    seq = build_three_ion_reorder("000", {.loading_bias = c.reorder.loading_bias});
  } else if (builtin == "swap-tomography") {
    seq = build_swap_tomography(0, 0, 0, 0, {.include_swap = c.tomography.include_swap});
  } else {
    throw ConfigError("give --sequence FILE or --builtin {reorder,swap-tomography}");
  }
  std::optional<TrapModel> model;
  if (mode == RunMode::dynamical) model.emplace(c.geometry());
  const auto res = run(seq, c.world(model ? &*model : nullptr, mode), mode);
  if (!res.report.completed) throw PhysicsError("sequence aborted: " + res.report.abort_reason);
  ctx.write_json("sequence.json", {{"sequence", seq}, {"mode", to_string(mode)}, {"report", res.report}});
  write_timeline(std::cout, res.report);
}

// ---------------------------------------------------------------------------

int report_error(const std::string& type, const std::string& message, int code) {
  std::cerr << Json{{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ionswap: ion-crystal swap, shuttling and analysis studies"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "master seed (overrides the config)");
  app.add_option("--out", flags.out, "output directory (overrides the config)");
  app.add_option("--workers", flags.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", flags.format, "extra table output")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"json", Format::json}, {"csv", Format::csv}}));
  app.add_flag("-q,--quiet", flags.quiet, "no summary on stdout");

  auto* calibrate = app.add_subcommand("calibrate", "fit segment scales to the target frequencies");
  auto* modes = app.add_subcommand("modes", "two-ion normal modes at the LIZ");
  auto* swap = app.add_subcommand("swap", "simulate the filtered swap");
  bool sweep = false;
  swap->add_flag("--sweep", sweep, "run every swap_study duration");
  auto* optimize = app.add_subcommand("optimize-swap", "minimise swap excitation over ramp parameters");
  auto* tomography = app.add_subcommand("tomography", "144-setting process tomography");
  auto* reorder = app.add_subcommand("reorder", "three-ion reordering truth table");
  auto* field_map = app.add_subcommand("field-map", "Ramsey echo field map");
  auto* rabi = app.add_subcommand("rabi-fit", "fit a phonon number to sideband data");
  std::string data;
  rabi->add_option("--data", data, "CSV with t,P,shots columns")->check(CLI::ExistingFile);
  auto* sequence = app.add_subcommand("sequence", "run a sequence and print its timeline");
  std::string seq_file, builtin;
  std::string mode_name = "logical";
  sequence->add_option("--sequence", seq_file, "JSON list of primitives")->check(CLI::ExistingFile);
  sequence->add_option("--builtin", builtin, "built-in sequence")->check(CLI::IsMember({"reorder", "swap-tomography"}));
  sequence->add_option("--mode", mode_name, "logical or dynamical")->check(CLI::IsMember({"logical", "dynamical"}));
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return report_error("usage", e.what(), 2);
  }

  try {
    auto* sub = app.get_subcommands().front();
    Context ctx(flags, sub->get_name());
    if (sub == calibrate) cmd_calibrate(ctx);
    else if (sub == modes) cmd_modes(ctx);
    else if (sub == swap) cmd_swap(ctx, sweep);
    else if (sub == optimize) cmd_optimize_swap(ctx);
    else if (sub == tomography) cmd_tomography(ctx);
    else if (sub == reorder) cmd_reorder(ctx);
    else if (sub == field_map) cmd_field_map(ctx);
    else if (sub == rabi) cmd_rabi_fit(ctx, data);
    else if (sub == sequence) cmd_sequence(ctx, seq_file, builtin, parse_run_mode(mode_name));
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), 2);
  } catch (const CalibrationError& e) {
    return report_error("calibration", e.what(), 2);
  } catch (const PhysicsError& e) {
    return report_error("physics", e.what(), 3);
  } catch (const FitError& e) {
    return report_error("fit", e.what(), 4);
  } catch (const nlohmann::json::exception& e) {
    return report_error("config", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return 0;
}

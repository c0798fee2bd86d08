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


#include "ionswap/experiments.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "ionswap/errors.hpp"
#include "ionswap/random.hpp"

namespace ionswap {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(n, std::size_t(std::max(workers, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------

TomographySetting TomographySetting::from_index(std::size_t index) {
  if (index >= kTomographySettings) throw ConfigError("tomography setting index out of range");
  const int prep = int(index / 9), analysis = int(index % 9);
  return {prep / 4, prep % 4, analysis / 3, analysis % 3};
}

std::size_t TomographySetting::index() const {
  return std::size_t(9 * (4 * prep_left + prep_right) + 3 * analysis_left + analysis_right);
}

TomographyAnalysis analyze_tomography(const TomographyCounts& counts, const ReadoutModel& readout,
                                      bool include_swap) {
  if (counts.size() != kTomographySettings) throw ConfigError("tomography needs 144 settings");
  // Readout labels follow the ions sitting left and right at readout.
  const std::vector<std::string> labels = include_swap ? std::vector<std::string>{"B", "A"}
                                                       : std::vector<std::string>{"A", "B"};
  TomographyAnalysis out;
  for (std::size_t prep = 0; prep < 16; ++prep) {
    SettingProbabilities raw{}, corrected{};
    for (std::size_t a = 0; a < 9; ++a) {
      const auto& h = counts[9 * prep + a];
      if (h.size() != 4) throw ConfigError("tomography histograms need four outcomes");
      std::uint64_t shots = 0;
      for (auto c : h) shots += c;
      if (shots == 0) throw ConfigError("tomography setting " + std::to_string(9 * prep + a) + " has no shots");
      std::vector<double> p(4);
      for (std::size_t o = 0; o < 4; ++o) p[o] = double(h[o]) / double(shots);
      const auto fixed = readout_correct(p, labels, readout);
      out.clip_mass += fixed.clip_mass;
      for (std::size_t o = 0; o < 4; ++o) {
        raw[a][o] = p[o];
        corrected[a][o] = fixed.inverse[o];
      }
    }
    out.states_raw.push_back(state_from_probabilities(raw));
    out.states_corrected.push_back(state_from_probabilities(corrected));
  }
  const auto inputs = preparation_states();
  out.chi_raw = chi_from_states(inputs, out.states_raw);
  out.chi_corrected = chi_from_states(inputs, out.states_corrected);
  out.chi_ideal = chi_of_unitary(include_swap ? swap_unitary() : CMatrix::Identity(4, 4));
  out.fidelity_raw = process_fidelity(out.chi_raw, out.chi_ideal);
  out.fidelity_corrected = process_fidelity(out.chi_corrected, out.chi_ideal);
  out.trace_residual_raw = trace_preservation_residual(out.chi_raw);
  out.trace_residual_corrected = trace_preservation_residual(out.chi_corrected);
  return out;
}

TomographyRun run_tomography(const World& world, const TomographyOptions& options) {
  if (options.shots == 0) throw ConfigError("tomography needs at least one shot per setting");
  SwapTomographyLayout layout;
  layout.site = world.trap().liz_segment;
  layout.include_swap = options.include_swap;

  TomographyRun out;
  out.counts.assign(kTomographySettings, {});
  std::vector<std::string> aborted(kTomographySettings);
  parallel_for(kTomographySettings, options.workers, [&](std::size_t i) {
    const auto s = TomographySetting::from_index(i);
    const auto seq = build_swap_tomography(s.prep_left, s.prep_right, s.analysis_left, s.analysis_right, layout);
    auto res = run(seq, world, options.mode);
    if (!res.report.completed) {
      aborted[i] = res.report.abort_reason;
      return;
    }
    out.counts[i] = sample_outcomes(res.state, options.readout, res.readout_order, options.shots,
                                    child_seed(options.seed, i));
    if (i == 0) out.example_report = std::move(res.report);
  });
  for (std::size_t i = 0; i < kTomographySettings; ++i)
    if (!aborted[i].empty())
      throw PhysicsError("tomography setting " + std::to_string(i) + " aborted: " + aborted[i]);
  out.analysis = analyze_tomography(out.counts, options.readout, options.include_swap);
  return out;
}

// ---------------------------------------------------------------------------

ReorderRun run_reorder(const World& world, const ReorderOptions& options) {
  if (options.shots == 0) throw ConfigError("reorder needs at least one shot per input");
  const int liz = world.trap().liz_segment;
  ReorderLayout layout{liz, liz - 6, liz + 6, liz + 10, options.loading_bias};

  ReorderRun out;
  for (int i = 0; i < 8; ++i) {
    std::string bits(3, '0');
    for (int k = 0; k < 3; ++k)
      if (i >> (2 - k) & 1) bits[std::size_t(k)] = '1';
    out.inputs.push_back(bits);
  }
  out.counts.assign(8, {});
  std::vector<std::vector<std::string>> orders(8);
  std::vector<SequenceReport> reports(8);
  parallel_for(8, options.workers, [&](std::size_t i) {
    auto res = run(build_three_ion_reorder(out.inputs[i], layout), world);
    orders[i] = res.report.final_order();
    out.counts[i] = sample_outcomes(res.state, options.readout, orders[i], options.shots,
                                    child_seed(options.seed, i));
    reports[i] = std::move(res.report);
  });
  for (const auto& o : orders)
    if (o != orders.front()) throw PhysicsError("reorder final order depends on the input");
  out.report = std::move(reports.front());

  const auto& order = orders.front();
  for (std::size_t o = 0; o < 8; ++o) {
    std::string s(3, '0');
    for (std::size_t k = 0; k < 3; ++k)
      if (o >> (2 - k) & 1) s[k] = '1';
    out.outputs.push_back(s);
  }
  std::vector<std::size_t> expected;
  std::vector<std::vector<double>> raw, corrected, clipped;
  for (std::size_t i = 0; i < 8; ++i) {
    std::size_t e = 0;
    for (const auto& ion : order) e = (e << 1) | std::size_t(out.inputs[i][std::size_t(ion[0] - 'A')] == '1');
    expected.push_back(e);
    std::uint64_t shots = 0;
    for (auto c : out.counts[i]) shots += c;
    std::vector<double> p(8);
    for (std::size_t o = 0; o < 8; ++o) p[o] = double(out.counts[i][o]) / double(shots);
    const auto fixed = readout_correct(p, order, options.readout);
    out.clip_mass += fixed.clip_mass;
    raw.push_back(std::move(p));
    corrected.push_back(fixed.inverse);
    clipped.push_back(fixed.clipped);
  }
  out.raw = truth_table(raw, expected);
  out.corrected = truth_table(corrected, expected);
  out.clipped = truth_table(clipped, expected);
  return out;
}

// ---------------------------------------------------------------------------

FieldMapRun run_field_map(const World& world, const FieldMapOptions& options) {
  const TrapGeometry& g = world.trap();
  const int liz = g.liz_segment;
  constexpr double kPi = std::numbers::pi;
  EchoProbe probe = [&](double x, double hold, std::size_t shots, std::uint64_t seed) {
    std::array<std::uint64_t, 2> up{};
    for (int k = 0; k < 2; ++k) {
      const auto res = run(build_echo_probe(g.nearest_segment(x), hold, k * kPi / 2, liz), world);
      up[std::size_t(k)] = sample_outcomes(res.state, options.readout, {"A"}, shots,
                                           child_seed(seed, std::uint64_t(k)))[1];
    }
    return up;
  };
  std::vector<double> xs;
  for (int s : options.segments) {
    if (!g.has_segment(s)) throw ConfigError("field map segment outside the trap");
    xs.push_back(g.center(s));
  }
  FieldMapRun out;
  out.estimates = ramsey_field_scan(probe, xs, options.holds, options.shots, options.seed);
  for (double x : xs) out.injected.push_back(world.field.delta_b(x));
  return out;
}

// ---------------------------------------------------------------------------

double effective_swap_duration(const SwapRampParams& params, const FilterModel& filter) {
  return activity_window(FilteredSchedule(swap_schedule(params), filter), 0.01).length();
}

std::vector<SwapStudyPoint> swap_duration_sweep(const TrapModel& model, SwapRampParams params,
                                                const std::vector<double>& durations,
                                                const FilterModel& filter, const IntegrationOptions& opts,
                                                int workers) {
  std::vector<SwapStudyPoint> out(durations.size());
  parallel_for(durations.size(), workers, [&](std::size_t i) {
    SwapRampParams p = params;
    p.duration = durations[i];
    out[i].programmed_us = durations[i];
    out[i].effective_us = effective_swap_duration(p, filter);
    out[i].simulation = simulate_swap(model, p, filter, opts);
  });
  return out;
}

SwapOptimizeRun optimize_swap(const TrapModel& model, const SwapRampParams& start, const FilterModel& filter,
                              const IntegrationOptions& opts, const SwapOptimizeOptions& options) {
  NelderMeadOptions nm;
  nm.lower = options.lower;
  nm.upper = options.upper;
  nm.max_evaluations = options.max_evaluations;
  nm.restarts = options.restarts;
  nm.seed = options.seed;
  nm.x_tolerance = 1e-4;
  nm.f_tolerance = 1e-6;
  nm.on_iteration = options.on_iteration;
  IntegrationOptions quiet = opts;
  quiet.stride = 0;
  SwapOptimizeRun out;
  out.optimum = optimize_swap([&](const SwapRampParams& p) { return swap_objective(model, p, filter, quiet); },
                              start, options.parameters, nm);
  out.simulation = simulate_swap(model, out.optimum.params, filter, quiet);
  return out;
}

}  // namespace ionswap

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

// Sampled electrode waveforms (swap, transport, separation/merge), the
// per-channel analog low-pass filter, and swap ramp optimization.

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ionswap/optimize.hpp"
#include "ionswap/trap_model.hpp"

namespace ionswap {

inline constexpr double kDefaultSampleRate = 2.5;  // samples per us

/// Number of samples covering `duration` at `sample_rate`: ceil(T * rate).
std::size_t sample_count(double duration, double sample_rate);

/// Per-channel voltage samples on a uniform grid starting at t = 0. Sample i
/// is held (zero-order hold) on [i/rate, (i+1)/rate); the last sample is held
/// indefinitely.
class VoltageSchedule {
 public:
  using Channels = std::map<ChannelId, std::vector<double>>;

  VoltageSchedule() = default;
  /// Throws ConfigError unless every channel has sample_count(duration, rate)
  /// samples.
  VoltageSchedule(double duration, double sample_rate, Channels channels,
                  std::map<std::string, double> metadata = {});

  double duration() const { return duration_; }
  double sample_rate() const { return sample_rate_; }
  std::size_t samples() const { return samples_; }
  const Channels& channels() const { return channels_; }
  const std::vector<double>& channel(ChannelId id) const;
  const std::map<std::string, double>& metadata() const { return metadata_; }
  double sample_time(std::size_t i) const { return double(i) / sample_rate_; }

  VoltageAssignment first() const;
  VoltageAssignment last() const;

  /// Sample-reversed copy (same channels, same duration).
  VoltageSchedule reversed() const;
  /// a*this + b*other on the union of channels; grids must match.
  VoltageSchedule combined(double a, const VoltageSchedule& other, double b) const;

 private:
  double duration_ = 0;
  double sample_rate_ = kDefaultSampleRate;
  std::size_t samples_ = 0;
  Channels channels_;
  std::map<std::string, double> metadata_;
};

void write_csv(std::ostream& out, const VoltageSchedule& schedule);
VoltageSchedule read_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Swap

struct SwapRampParams {
  int site = 20;
  double u_d_peak = 1.4;
  double u_c_start = -6.0;
  double u_c_deep = -9.5;
  double u_o_peak = 4.0;
  // Ramp-up end, transition end, flip end, ramp-down start (in tau = t/T).
  std::vector<double> breakpoints{0.05, 0.45, 0.55, 0.95};
  double duration = 22.0;  // us
  double sample_rate = kDefaultSampleRate;

  void validate() const;
};

/// Piecewise-linear samples: U_d up in [0, b0]; U_c -> deep and U_o -> peak on
/// [b0, b1]; U_d reverses sign on [b1, b2]; the second half mirrors the first
/// with U_d negated. Channels: dc(site), dc(site +- 1), diag(site).
VoltageSchedule swap_schedule(const SwapRampParams& params);

// ---------------------------------------------------------------------------
// Transport

struct TransportParams {
  double per_pair_duration = 28.0;  // us per segment hop
  double u_c = -6.0;
  double sample_rate = kDefaultSampleRate;
};

/// Concatenated single-hop cross-fades of `u_c` from segment to segment,
/// paced so the well minimum moves smoothly. from == to gives an empty
/// schedule.
VoltageSchedule transport_schedule(const TrapGeometry& geometry, int from_segment, int to_segment,
                                   const TransportParams& params = {});

// ---------------------------------------------------------------------------
// Separation / merge

struct SeparationParams {
  double duration = 100.0;  // us
  double u_c = -6.0;
  double bias = 0.0;  // V; positive pushes the crystal towards +x mid-split
  double sample_rate = kDefaultSampleRate;
};

/// Morph fraction at which the centre curvature of the single/double well
/// interpolation vanishes.
double critical_morph(const TrapGeometry& geometry);

/// Single well at `site` -> wells at site-1 and site+1. The morph follows the
/// two-ion equilibrium so the spacing itself moves on a minimum-jerk profile,
/// which slows the ramp where the stretch mode softens.
VoltageSchedule separation_schedule(const TrapGeometry& geometry, int site,
                                    const SeparationParams& params = {});
VoltageSchedule merge_schedule(const TrapGeometry& geometry, int site,
                               const SeparationParams& params = {});

// ---------------------------------------------------------------------------
// Filter

struct FilterModel {
  double cutoff_mhz = 0.05;                // ordinary frequency; omega_c = 2 pi f
  double q = 0.70710678118654752;          // 1/sqrt(2): maximally flat
  double settle_tolerance = 1e-4;          // V

  void validate() const;
};

/// Exact response of y'' + (w/Q) y' + w^2 y = w^2 u to the zero-order-hold
/// sample stream, initialised at rest at the first sample.
class FilteredSchedule {
 public:
  FilteredSchedule(const VoltageSchedule& schedule, const FilterModel& filter);

  const VoltageSchedule& schedule() const { return schedule_; }
  /// Time after duration() by which every channel is within the settle
  /// tolerance of its final sample (and stays there).
  double settling_tail() const { return tail_; }
  double end_time() const { return schedule_.duration() + tail_; }

  double value(ChannelId id, double t) const;
  /// Overwrites the schedule's channels in a dense voltage set.
  void write(double t, const TrapGeometry& geometry, ElectrodeVoltages& out) const;

 private:
  struct Track {
    ChannelId id;
    std::vector<double> samples;
    std::vector<double> y;   // state at the start of each hold interval
    std::vector<double> dy;
    bool constant = false;
  };
  double evaluate(const Track& track, double t) const;

  VoltageSchedule schedule_;
  FilterModel filter_;
  double omega_ = 0;
  double sigma_ = 0;
  std::vector<Track> tracks_;
  double tail_ = 0;
};

/// Drive whose filtered response tracks `schedule` itself: each channel gets
/// u + u'/(Q w) + u''/w^2 from finite differences. Meant for smooth
/// schedules that start and end at rest.
VoltageSchedule precompensate(const VoltageSchedule& schedule, const FilterModel& filter);

/// Closed-form unit-step response of the filter.
double filter_step_response(const FilterModel& filter, double t);

struct ActivityWindow {
  double start = 0;
  double end = 0;
  double length() const { return end - start; }
};

/// Interval during which any channel deviates from its initial (at the start)
/// or final (at the end) value by more than `threshold` of its largest
/// excursion, sampled every `step` us.
ActivityWindow activity_window(const FilteredSchedule& filtered, double threshold,
                               double step = 0.01);

// ---------------------------------------------------------------------------
// Swap optimization

/// Names accepted in `free_params`: u_d_peak, u_c_deep, u_o_peak, ramp_up_end,
/// transition_end, duration.
std::vector<std::string> swap_parameter_names();

struct SwapOptimization {
  SwapRampParams params;
  double value = 0;
  double initial_value = 0;
  int evaluations = 0;
};

/// Bounds in `options`, if given, are intersected with each parameter's
/// admissible range.
SwapOptimization optimize_swap(const std::function<double(const SwapRampParams&)>& objective,
                               const SwapRampParams& initial,
                               const std::vector<std::string>& free_params,
                               NelderMeadOptions options = {});

}  // namespace ionswap

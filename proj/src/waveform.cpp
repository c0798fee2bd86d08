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

#include "ionswap/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <istream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "ionswap/errors.hpp"
#include "ionswap/units.hpp"

namespace ionswap {

std::size_t sample_count(double duration, double sample_rate) {
  if (!(duration >= 0) || !(sample_rate > 0)) throw ConfigError("bad duration or sample rate");
  // Guard against 28 * 2.5 = 70.00000000000001.
  return static_cast<std::size_t>(std::ceil(duration * sample_rate - 1e-9));
}

VoltageSchedule::VoltageSchedule(double duration, double sample_rate, Channels channels,
                                 std::map<std::string, double> metadata)
    : duration_(duration),
      sample_rate_(sample_rate),
      samples_(sample_count(duration, sample_rate)),
      channels_(std::move(channels)),
      metadata_(std::move(metadata)) {
  for (const auto& [id, values] : channels_) {
    if (values.size() != samples_)
      throw ConfigError("channel " + id.name() + " has " + std::to_string(values.size()) +
                        " samples, expected " + std::to_string(samples_));
    for (double v : values)
      if (!std::isfinite(v)) throw ConfigError("non-finite voltage on " + id.name());
  }
}

const std::vector<double>& VoltageSchedule::channel(ChannelId id) const {
  auto it = channels_.find(id);
  if (it == channels_.end()) throw ConfigError("schedule has no channel " + id.name());
  return it->second;
}

VoltageAssignment VoltageSchedule::first() const {
  VoltageAssignment out;
  if (samples_ == 0) return out;
  for (const auto& [id, values] : channels_) out[id] = values.front();
  return out;
}

VoltageAssignment VoltageSchedule::last() const {
  VoltageAssignment out;
  if (samples_ == 0) return out;
  for (const auto& [id, values] : channels_) out[id] = values.back();
  return out;
}

VoltageSchedule VoltageSchedule::reversed() const {
  Channels flipped = channels_;
  for (auto& [id, values] : flipped) std::reverse(values.begin(), values.end());
  return VoltageSchedule(duration_, sample_rate_, std::move(flipped), metadata_);
}

VoltageSchedule VoltageSchedule::combined(double a, const VoltageSchedule& other, double b) const {
  if (other.samples_ != samples_ || other.sample_rate_ != sample_rate_)
    throw ConfigError("cannot combine schedules on different sample grids");
  Channels out;
  for (const auto& [id, values] : channels_) {
    auto& dst = out[id];
    dst.assign(samples_, 0.0);
    for (std::size_t i = 0; i < samples_; ++i) dst[i] += a * values[i];
  }
  for (const auto& [id, values] : other.channels_) {
    auto& dst = out[id];
    if (dst.empty()) dst.assign(samples_, 0.0);
    for (std::size_t i = 0; i < samples_; ++i) dst[i] += b * values[i];
  }
  return VoltageSchedule(duration_, sample_rate_, std::move(out));
}

void write_csv(std::ostream& out, const VoltageSchedule& schedule) {
  out << std::setprecision(17);
  out << "# duration_us=" << schedule.duration() << " sample_rate=" << schedule.sample_rate()
      << "\n";
  out << "t_us";
  for (const auto& [id, values] : schedule.channels()) out << "," << id.name();
  out << "\n";
  for (std::size_t i = 0; i < schedule.samples(); ++i) {
    out << schedule.sample_time(i);
    for (const auto& [id, values] : schedule.channels()) out << "," << values[i];
    out << "\n";
  }
}

VoltageSchedule read_csv(std::istream& in) {
  std::string line;
  double duration = -1;
  double rate = -1;
  if (!std::getline(in, line) || line.rfind("#", 0) != 0)
    throw ConfigError("schedule CSV must start with a '# duration_us=... sample_rate=...' line");
  {
    std::istringstream meta(line.substr(1));
    std::string token;
    while (meta >> token) {
      auto eq = token.find('=');
      if (eq == std::string::npos) continue;
      const auto key = token.substr(0, eq);
      const double value = std::stod(token.substr(eq + 1));
      if (key == "duration_us") duration = value;
      if (key == "sample_rate") rate = value;
    }
  }
  if (duration < 0 || rate <= 0) throw ConfigError("schedule CSV header lacks duration/rate");
  if (!std::getline(in, line)) throw ConfigError("schedule CSV has no column header");
  std::vector<ChannelId> ids;
  {
    std::istringstream header(line);
    std::string cell;
    std::getline(header, cell, ',');
    if (cell != "t_us") throw ConfigError("first schedule column must be t_us");
    while (std::getline(header, cell, ',')) ids.push_back(ChannelId::parse(cell));
  }
  VoltageSchedule::Channels channels;
  for (auto id : ids) channels[id];
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    for (auto id : ids) {
      if (!std::getline(row, cell, ',')) throw ConfigError("short schedule CSV row");
      channels[id].push_back(std::stod(cell));
    }
  }
  return VoltageSchedule(duration, rate, std::move(channels));
}

// ---------------------------------------------------------------------------

void SwapRampParams::validate() const {
  if (breakpoints.size() != 4) throw ConfigError("swap ramp needs four breakpoints");
  double prev = 0.0;
  for (double b : breakpoints) {
    if (!(b > prev && b < 1.0)) throw ConfigError("swap breakpoints must increase within (0,1)");
    prev = b;
  }
  if (std::abs(breakpoints[2] - (1.0 - breakpoints[1])) > 1e-12 ||
      std::abs(breakpoints[3] - (1.0 - breakpoints[0])) > 1e-12)
    throw ConfigError("swap breakpoints must be symmetric about tau = 0.5");
  if (!(duration > 0)) throw ConfigError("swap duration must be positive");
  if (sample_count(duration, sample_rate) < 3) throw ConfigError("swap schedule too short");
}

VoltageSchedule swap_schedule(const SwapRampParams& p) {
  p.validate();
  const std::size_t n = sample_count(p.duration, p.sample_rate);
  const double b0 = p.breakpoints[0];
  const double b1 = p.breakpoints[1];
  auto ramp = [](double tau, double lo, double hi) {
    return std::clamp((tau - lo) / (hi - lo), 0.0, 1.0);
  };

  std::vector<double> uc(n), uo(n), ud(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Mirror on the integer grid so the symmetry is exact at the samples.
    const std::size_t j = std::min(i, n - 1 - i);
    const double tau = double(j) / double(n - 1);
    const double s = ramp(tau, b0, b1);
    uc[i] = p.u_c_start + (p.u_c_deep - p.u_c_start) * s;
    uo[i] = p.u_o_peak * s;
    double d = p.u_d_peak * std::min(ramp(tau, 0.0, b0), 1.0 - ramp(tau, b1, 0.5));
    ud[i] = i > n - 1 - i ? -d : d;
  }
  VoltageSchedule::Channels channels;
  channels[ChannelId::dc(p.site)] = uc;
  channels[ChannelId::dc(p.site - 1)] = uo;
  channels[ChannelId::dc(p.site + 1)] = uo;
  channels[ChannelId::diagonal(p.site)] = ud;
  return VoltageSchedule(
      p.duration, p.sample_rate, std::move(channels),
      {{"u_d_peak", p.u_d_peak}, {"u_c_start", p.u_c_start}, {"u_c_deep", p.u_c_deep},
       {"u_o_peak", p.u_o_peak}, {"ramp_up_end", b0}, {"transition_end", b1},
       {"duration", p.duration}});
}

namespace {

double smootherstep(double t) { return t * t * t * (10 - 15 * t + 6 * t * t); }

// Normalised progress table on a uniform grid in [0, 1] -> grid coordinate
// reaching progress q.
double invert_table(const std::vector<double>& progress, double q) {
  const std::size_t grid = progress.size() - 1;
  const auto it = std::lower_bound(progress.begin(), progress.end(), q);
  if (it == progress.begin()) return 0.0;
  if (it == progress.end()) return 1.0;
  const auto k = std::size_t(it - progress.begin());
  const double f = (q - progress[k - 1]) / std::max(progress[k] - progress[k - 1], 1e-300);
  return (double(k - 1) + f) / double(grid);
}

// Single-ion equilibrium along a cross-fade from `src` to `dst`, normalised
// to [0, 1].
std::vector<double> hop_position_table(const TrapGeometry& geometry, int src, int dst, double u_c,
                                       std::size_t grid) {
  const TrapModel model(geometry);
  const double a = geometry.center(src), b = geometry.center(dst);
  const double lo0 = std::min(a, b) - 0.25 * geometry.spacing;
  const double hi0 = std::max(a, b) + 0.25 * geometry.spacing;
  std::vector<double> x(grid + 1);
  for (std::size_t k = 0; k <= grid; ++k) {
    const double s = double(k) / double(grid);
    const auto v = model.dense({{ChannelId::dc(src), u_c * (1 - s)}, {ChannelId::dc(dst), u_c * s}});
    auto f = [&](double p) { return model.gradient(v, Vec3(p, 0, 0)).x(); };
    double lo = lo0, hi = hi0;
    if (!(f(lo) < 0 && f(hi) > 0)) throw ConfigError("transport cross-fade loses its single well");
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0 ? lo : hi) = mid;
    }
    x[k] = 0.5 * (lo + hi);
  }
  std::vector<double> progress(grid + 1);
  for (std::size_t k = 0; k <= grid; ++k) {
    progress[k] = (x[k] - x.front()) / (x.back() - x.front());
    if (k > 0 && progress[k] < progress[k - 1] - 1e-9)
      throw ConfigError("transport well does not move monotonically");
  }
  return progress;
}

}  // namespace

VoltageSchedule transport_schedule(const TrapGeometry& geometry, int from_segment, int to_segment,
                                   const TransportParams& p) {
  if (from_segment == to_segment) return VoltageSchedule(0.0, p.sample_rate, {});
  if (!geometry.has_segment(from_segment) || !geometry.has_segment(to_segment))
    throw ConfigError("transport endpoints must lie inside the trap");
  if (!(p.u_c < 0)) throw ConfigError("transport well voltage must be negative");
  const int hops = std::abs(to_segment - from_segment);
  const int dir = to_segment > from_segment ? 1 : -1;
  const std::size_t per_hop = sample_count(p.per_pair_duration, p.sample_rate);
  if (per_hop < 2) throw ConfigError("transport hop shorter than two samples");
  // Hop durations are rounded up to whole samples.
  const double duration = double(per_hop * hops) / p.sample_rate;

  // Every hop is a translate of the first; the cross-fade is driven so the
  // well minimum, not the fade, moves on a minimum-jerk profile.
  const std::size_t grid = 2000;
  const auto table = hop_position_table(geometry, from_segment, from_segment + dir, p.u_c, grid);
  std::vector<double> fade(per_hop);
  for (std::size_t i = 0; i < per_hop; ++i) {
    const double tau = double(i) / double(per_hop - 1);
    fade[i] = i == 0 ? 0.0 : i + 1 == per_hop ? 1.0 : invert_table(table, smootherstep(tau));
  }

  VoltageSchedule::Channels channels;
  for (int k = 0; k <= hops; ++k) channels[ChannelId::dc(from_segment + dir * k)];
  for (auto& [id, values] : channels) values.reserve(per_hop * hops);
  for (int k = 0; k < hops; ++k) {
    const int src = from_segment + dir * k;
    const int dst = src + dir;
    for (std::size_t i = 0; i < per_hop; ++i) {
      for (auto& [id, values] : channels) {
        double v = 0.0;
        if (id.segment == src) v = p.u_c * (1.0 - fade[i]);
        if (id.segment == dst) v = p.u_c * fade[i];
        values.push_back(v);
      }
    }
  }
  return VoltageSchedule(duration, p.sample_rate, std::move(channels),
                         {{"from", double(from_segment)}, {"to", double(to_segment)},
                          {"per_pair_duration", p.per_pair_duration}});
}

double critical_morph(const TrapGeometry& geometry) {
  const double u = geometry.spacing / geometry.axial_width;
  const double g = (u * u - 1.0) * std::exp(-0.5 * u * u);
  const double lambda = 1.0 / (1.0 + 2.0 * g);
  if (!(lambda > 0.0 && lambda < 1.0))
    throw ConfigError("segment width admits no single-to-double well morph");
  return lambda;
}

namespace {

// Equilibrium two-ion spacing (um) along the morph lambda in [0, 1], sampled on
// a uniform grid. Symmetric wells keep the crystal centred on the site.
std::vector<double> morph_spacing_table(const TrapGeometry& geometry, int site, double u_c,
                                        std::size_t grid) {
  const TrapModel model(geometry);
  const double c = geometry.center(site);
  std::vector<double> d(grid + 1);
  double s = 1.0;
  for (std::size_t k = 0; k <= grid; ++k) {
    const double lambda = double(k) / double(grid);
    const auto v = model.dense({{ChannelId::dc(site - 1), u_c * lambda},
                                {ChannelId::dc(site), u_c * (1 - lambda)},
                                {ChannelId::dc(site + 1), u_c * lambda}});
    // dE/ds for ions at c +- s: restoring force minus Coulomb push.
    auto g = [&](double x) {
      return 2 * units::kEvToInternal * model.gradient(v, Vec3(c + x, 0, 0)).x() -
             units::kCoulomb / (2 * x * x);
    };
    double lo = std::max(0.05, 0.98 * s);
    while (g(lo) > 0 && lo > 0.05) lo *= 0.5;
    double hi = lo;
    const double step = 0.25;
    while (g(hi) < 0) {
      lo = hi;
      hi += step;
      if (hi > 2 * geometry.spacing) throw ConfigError("no two-ion equilibrium along the separation morph");
    }
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < 0 ? lo : hi) = mid;
    }
    s = 0.5 * (lo + hi);
    d[k] = 2 * s;
    if (k > 0 && d[k] < d[k - 1] - 1e-9)
      throw ConfigError("separation spacing is not monotone in the morph");
  }
  return d;
}

}  // namespace

VoltageSchedule separation_schedule(const TrapGeometry& geometry, int site,
                                    const SeparationParams& p) {
  if (!geometry.has_segment(site - 1) || !geometry.has_segment(site + 1))
    throw ConfigError("separation site needs two neighbouring segments");
  if (!(p.u_c < 0)) throw ConfigError("separation well voltage must be negative");
  const double lc = critical_morph(geometry);

  const std::size_t grid = 2000;
  const auto table = morph_spacing_table(geometry, site, p.u_c, grid);
  // The crystal spacing, not the morph, follows the minimum-jerk profile.
  const double d0 = table.front(), d1 = table.back();
  std::vector<double> progress(grid + 1);
  for (std::size_t k = 0; k <= grid; ++k) progress[k] = (table[k] - d0) / (d1 - d0);
  const std::size_t n = sample_count(p.duration, p.sample_rate);
  if (n < 3) throw ConfigError("separation schedule too short");
  std::vector<double> left(n), centre(n), right(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = double(i) / double(n - 1);
    double lambda = invert_table(progress, smootherstep(tau));
    if (i == 0) lambda = 0.0;
    if (i == n - 1) lambda = 1.0;
    const double bias = i == 0 || i == n - 1 ? 0.0 : p.bias * 4.0 * tau * (1.0 - tau);
    centre[i] = p.u_c * (1.0 - lambda);
    left[i] = p.u_c * lambda + 0.5 * bias;
    right[i] = p.u_c * lambda - 0.5 * bias;
  }
  VoltageSchedule::Channels channels;
  channels[ChannelId::dc(site - 1)] = left;
  channels[ChannelId::dc(site)] = centre;
  channels[ChannelId::dc(site + 1)] = right;
  return VoltageSchedule(p.duration, p.sample_rate, std::move(channels),
                         {{"site", double(site)}, {"bias", p.bias}, {"critical_morph", lc}});
}

VoltageSchedule merge_schedule(const TrapGeometry& geometry, int site, const SeparationParams& p) {
  return separation_schedule(geometry, site, p).reversed();
}

// ---------------------------------------------------------------------------

void FilterModel::validate() const {
  if (!(cutoff_mhz > 0) || !(q > 0) || !(settle_tolerance > 0))
    throw ConfigError("filter cutoff, Q and settle tolerance must be positive");
}

namespace {

// Homogeneous evolution of the deviation e = y - u over dt.
struct Deviation {
  double e;
  double de;
};

Deviation propagate(double omega, double sigma, Deviation d, double dt) {
  const double disc = sigma * sigma - omega * omega;
  double c;
  double s;
  if (disc < -1e-14 * omega * omega) {
    const double wd = std::sqrt(-disc);
    c = std::cos(wd * dt);
    s = std::sin(wd * dt) / wd;
  } else if (disc > 1e-14 * omega * omega) {
    const double k = std::sqrt(disc);
    c = std::cosh(k * dt);
    s = std::sinh(k * dt) / k;
  } else {
    c = 1.0;
    s = dt;
  }
  const double decay = std::exp(-sigma * dt);
  return {decay * (c * d.e + s * (sigma * d.e + d.de)),
          decay * (c * d.de - s * (omega * omega * d.e + sigma * d.de))};
}

}  // namespace

FilteredSchedule::FilteredSchedule(const VoltageSchedule& schedule, const FilterModel& filter)
    : schedule_(schedule), filter_(filter) {
  filter_.validate();
  omega_ = units::angular(filter_.cutoff_mhz);
  sigma_ = omega_ / (2.0 * filter_.q);
  const std::size_t n = schedule_.samples();
  const double h = 1.0 / schedule_.sample_rate();
  for (const auto& [id, values] : schedule_.channels()) {
    Track track{id, values, std::vector<double>(n), std::vector<double>(n), false};
    track.constant = std::all_of(values.begin(), values.end(),
                                 [&](double v) { return v == values.front(); });
    if (n > 0) {
      track.y[0] = values[0];
      track.dy[0] = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        auto d = propagate(omega_, sigma_, {track.y[i] - values[i], track.dy[i]}, h);
        track.y[i + 1] = d.e + values[i];
        track.dy[i + 1] = d.de;
      }
    }
    tracks_.push_back(std::move(track));
  }

  // Settling: after the last sample starts, the deviation decays freely.
  double settled = schedule_.duration();
  const double tol = filter_.settle_tolerance;
  for (const auto& track : tracks_) {
    if (track.constant || n == 0) continue;
    const double t0 = schedule_.sample_time(n - 1);
    Deviation d{track.y[n - 1] - track.samples.back(), track.dy[n - 1]};
    const double disc = sigma_ * sigma_ - omega_ * omega_;
    double t_settle = 0.0;
    if (disc < 0) {
      const double wd = std::sqrt(-disc);
      const double amplitude = std::hypot(d.e, (d.de + sigma_ * d.e) / wd);
      if (amplitude > tol) t_settle = std::log(amplitude / tol) / sigma_;
    } else {
      // Overdamped/critical: march until the envelope is below tolerance.
      const double dt = 0.01;
      double t = 0;
      double last_bad = 0;
      const double horizon = 50.0 / (sigma_ - std::sqrt(std::max(disc, 0.0)) + 1e-12);
      for (; t < horizon; t += dt) {
        auto x = propagate(omega_, sigma_, d, t);
        if (std::abs(x.e) > tol) last_bad = t;
      }
      t_settle = last_bad + dt;
    }
    settled = std::max(settled, t0 + t_settle);
  }
  tail_ = settled - schedule_.duration();
}

double FilteredSchedule::evaluate(const Track& track, double t) const {
  const auto& u = track.samples;
  if (u.empty()) return 0.0;
  if (track.constant || t <= 0.0) return u.front();
  const std::size_t n = u.size();
  auto i = static_cast<std::size_t>(t * schedule_.sample_rate());
  if (i >= n) i = n - 1;
  const double dt = t - schedule_.sample_time(i);
  auto d = propagate(omega_, sigma_, {track.y[i] - u[i], track.dy[i]}, dt);
  return u[i] + d.e;
}

double FilteredSchedule::value(ChannelId id, double t) const {
  for (const auto& track : tracks_)
    if (track.id == id) return evaluate(track, t);
  throw ConfigError("filtered schedule has no channel " + id.name());
}

void FilteredSchedule::write(double t, const TrapGeometry& geometry, ElectrodeVoltages& out) const {
  for (const auto& track : tracks_) {
    if (!geometry.has_segment(track.id.segment))
      throw ConfigError("schedule channel " + track.id.name() + " outside the trap");
    const auto k = static_cast<std::size_t>(track.id.segment - geometry.first_segment);
    (track.id.role == ChannelRole::kDc ? out.dc : out.diagonal)[k] = evaluate(track, t);
  }
}

VoltageSchedule precompensate(const VoltageSchedule& schedule, const FilterModel& filter) {
  filter.validate();
  const std::size_t n = schedule.samples();
  if (n < 3) return schedule;
  const double w = 2 * std::numbers::pi * filter.cutoff_mhz;
  const double h = 1.0 / schedule.sample_rate();
  VoltageSchedule::Channels out;
  for (const auto& [id, u] : schedule.channels()) {
    auto& v = out[id];
    v = u;
    // Samples are held, so derivatives are taken half a sample late.
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double d1 = (u[i + 1] - u[i - 1]) / (2 * h);
      const double d2 = (u[i + 1] - 2 * u[i] + u[i - 1]) / (h * h);
      v[i] += d1 / (filter.q * w) + d2 / (w * w);
    }
  }
  return VoltageSchedule(schedule.duration(), schedule.sample_rate(), std::move(out), schedule.metadata());
}

double filter_step_response(const FilterModel& filter, double t) {
  if (t <= 0) return 0.0;
  const double w = units::angular(filter.cutoff_mhz);
  const double sigma = w / (2.0 * filter.q);
  auto d = propagate(w, sigma, {-1.0, 0.0}, t);
  return 1.0 + d.e;
}

ActivityWindow activity_window(const FilteredSchedule& filtered, double threshold, double step) {
  const auto& channels = filtered.schedule().channels();
  const double end = filtered.end_time();
  const auto steps = static_cast<std::size_t>(std::ceil(end / step)) + 1;
  ActivityWindow window{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& [id, values] : channels) {
    if (values.empty()) continue;
    std::vector<double> y(steps);
    double excursion = 0;
    for (std::size_t k = 0; k < steps; ++k) {
      y[k] = filtered.value(id, double(k) * step);
      excursion = std::max(excursion, std::abs(y[k] - values.front()));
    }
    if (excursion == 0) continue;
    for (std::size_t k = 0; k < steps; ++k) {
      if (std::abs(y[k] - values.front()) > threshold * excursion) {
        window.start = std::min(window.start, double(k) * step);
        break;
      }
    }
    for (std::size_t k = steps; k-- > 0;) {
      if (std::abs(y[k] - values.back()) > threshold * excursion) {
        window.end = std::max(window.end, double(k) * step);
        break;
      }
    }
  }
  if (!std::isfinite(window.start)) return {0.0, 0.0};
  return window;
}

// ---------------------------------------------------------------------------

namespace {

struct FreeParam {
  double lower;
  double upper;
  double (*get)(const SwapRampParams&);
  void (*set)(SwapRampParams&, double);
};

FreeParam lookup(const std::string& name) {
  if (name == "u_d_peak")
    return {0.0, 10.0, [](const SwapRampParams& p) { return p.u_d_peak; },
            [](SwapRampParams& p, double v) { p.u_d_peak = v; }};
  if (name == "u_c_deep")
    return {-10.0, -0.5, [](const SwapRampParams& p) { return p.u_c_deep; },
            [](SwapRampParams& p, double v) { p.u_c_deep = v; }};
  if (name == "u_o_peak")
    return {0.0, 10.0, [](const SwapRampParams& p) { return p.u_o_peak; },
            [](SwapRampParams& p, double v) { p.u_o_peak = v; }};
  if (name == "ramp_up_end")
    return {0.005, 0.2, [](const SwapRampParams& p) { return p.breakpoints[0]; },
            [](SwapRampParams& p, double v) {
              p.breakpoints[0] = v;
              p.breakpoints[3] = 1.0 - v;
            }};
  if (name == "transition_end")
    return {0.25, 0.495, [](const SwapRampParams& p) { return p.breakpoints[1]; },
            [](SwapRampParams& p, double v) {
              p.breakpoints[1] = v;
              p.breakpoints[2] = 1.0 - v;
            }};
  if (name == "duration")
    return {2.0, 1000.0, [](const SwapRampParams& p) { return p.duration; },
            [](SwapRampParams& p, double v) { p.duration = v; }};
  throw ConfigError("unknown swap parameter '" + name + "'");
}

}  // namespace

std::vector<std::string> swap_parameter_names() {
  return {"u_d_peak", "u_c_deep", "u_o_peak", "ramp_up_end", "transition_end", "duration"};
}

SwapOptimization optimize_swap(const std::function<double(const SwapRampParams&)>& objective,
                               const SwapRampParams& initial,
                               const std::vector<std::string>& free_params,
                               NelderMeadOptions options) {
  if (free_params.empty()) throw ConfigError("optimize_swap needs at least one free parameter");
  initial.validate();
  const bool bounded = !options.lower.empty() || !options.upper.empty();
  if (bounded && (options.lower.size() != free_params.size() || options.upper.size() != free_params.size()))
    throw ConfigError("optimize_swap bounds must match the free parameters");
  std::vector<FreeParam> params;
  std::vector<double> x0;
  for (std::size_t i = 0; i < free_params.size(); ++i) {
    params.push_back(lookup(free_params[i]));
    x0.push_back(params.back().get(initial));
    // Caller bounds narrow the admissible range.
    const double lo = bounded ? std::max(options.lower[i], params.back().lower) : params.back().lower;
    const double hi = bounded ? std::min(options.upper[i], params.back().upper) : params.back().upper;
    if (!(lo < hi)) throw ConfigError("empty range for swap parameter '" + free_params[i] + "'");
    if (bounded) {
      options.lower[i] = lo;
      options.upper[i] = hi;
    } else {
      options.lower.push_back(lo);
      options.upper.push_back(hi);
    }
  }
  auto build = [&](std::span<const double> x) {
    SwapRampParams p = initial;
    for (std::size_t i = 0; i < params.size(); ++i) params[i].set(p, x[i]);
    return p;
  };
  if (options.target == -std::numeric_limits<double>::infinity()) options.target = 0.0;
  auto result = nelder_mead(
      [&](std::span<const double> x) {
        SwapRampParams p = build(x);
        try {
          p.validate();
        } catch (const ConfigError&) {
          return std::numeric_limits<double>::infinity();
        }
        return objective(p);
      },
      x0, options);
  SwapOptimization out;
  out.params = result.value < result.initial_value ? build(result.x) : initial;
  out.value = std::min(result.value, result.initial_value);
  out.initial_value = result.initial_value;
  out.evaluations = result.evaluations;
  return out;
}

}  // namespace ionswap

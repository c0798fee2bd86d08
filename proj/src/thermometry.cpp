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

#include "ionswap/thermometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "ionswap/errors.hpp"
#include "ionswap/optimize.hpp"
#include "ionswap/random.hpp"

namespace ionswap {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr int kMaxLevels = 100000;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

bool is_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

double clamp_probability(double p, std::uint64_t shots) {
  const double lo = 0.5 / double(shots + 1);
  return std::clamp(p, lo, 1 - lo);
}

}  // namespace

std::string to_string(Transition t) {
  switch (t) {
    case Transition::carrier: return "carrier";
    case Transition::rsb: return "rsb";
    default: return "bsb";
  }
}

Transition parse_transition(const std::string& s) {
  if (s == "carrier") return Transition::carrier;
  if (s == "rsb" || s == "red") return Transition::rsb;
  if (s == "bsb" || s == "blue") return Transition::bsb;
  throw ConfigError("unknown transition '" + s + "'");
}

std::string to_string(MotionalState s) { return s == MotionalState::coherent ? "coherent" : "thermal"; }

MotionalState parse_motional_state(const std::string& s) {
  if (s == "coherent") return MotionalState::coherent;
  if (s == "thermal") return MotionalState::thermal;
  throw ConfigError("unknown motional state model '" + s + "'");
}

std::vector<double> phonon_distribution(MotionalState state, double nbar, double tail) {
  if (!(nbar >= 0) || !std::isfinite(nbar)) throw ConfigError("mean phonon number must be >= 0");
  std::vector<double> p;
  double mass = 0;
  if (state == MotionalState::coherent) {
    double pn = std::exp(-nbar);
    for (int n = 0; n < kMaxLevels; ++n) {
      p.push_back(pn);
      mass += pn;
      if (1 - mass < tail && n >= nbar) break;
      pn *= nbar / (n + 1);
    }
  } else {
    const double r = nbar / (nbar + 1);
    double pn = 1 / (nbar + 1);
    for (int n = 0; n < kMaxLevels; ++n) {
      p.push_back(pn);
      mass += pn;
      if (1 - mass < tail) break;
      pn *= r;
    }
  }
  return p;
}

double rabi_frequency(Transition t, int n, double eta, double omega0) {
  switch (t) {
    case Transition::carrier: return omega0 * (1 - eta * eta * n);
    case Transition::rsb: return eta * omega0 * std::sqrt(double(n));
    default: return eta * omega0 * std::sqrt(double(n + 1));
  }
}

double rabi_model(MotionalState state, double nbar, const RabiParams& params, Transition t,
                  double time_us) {
  if (!(params.eta >= 0 && params.eta < 0.3)) throw ConfigError("Lamb-Dicke parameter must be in [0, 0.3)");
  if (!(time_us >= 0)) throw ConfigError("pulse time must be >= 0");
  if (params.ions != 1 && params.ions != 2) throw ConfigError("ions must be 1 or 2");
  const auto pn = phonon_distribution(state, nbar);
  const double envelope = std::exp(-params.decay * time_us);
  double total = 0;
  for (std::size_t n = 0; n < pn.size(); ++n) {
    const double w = rabi_frequency(t, int(n), params.eta, params.omega0);
    double s = 0.5 * (1 - envelope * std::cos(w * time_us));
    if (params.ions == 2) s = 1 - (1 - s) * (1 - s);
    total += pn[n] * s;
  }
  return std::clamp(total, 0.0, 1.0);
}

void RabiDataset::validate() const {
  if (times.size() != probabilities.size() || times.size() != shots.size())
    throw ConfigError("Rabi dataset columns differ in length");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0)) throw ConfigError("Rabi dataset has a negative time");
    if (!(probabilities[i] >= 0 && probabilities[i] <= 1))
      throw ConfigError("Rabi dataset probability outside [0, 1]");
    if (shots[i] == 0) throw ConfigError("Rabi dataset point with zero shots");
  }
}

RabiDataset synthesize_rabi(MotionalState state, double nbar, const RabiParams& params,
                            Transition t, std::span<const double> times, std::uint64_t shots,
                            std::uint64_t seed, const std::string& mode) {
  if (shots == 0) throw ConfigError("shots must be positive");
  RabiDataset d;
  d.transition = t;
  d.mode = mode;
  std::mt19937_64 rng(seed);
  for (double time : times) {
    const double p = rabi_model(state, nbar, params, t, time);
    std::binomial_distribution<std::uint64_t> draw(shots, p);
    d.times.push_back(time);
    d.probabilities.push_back(double(draw(rng)) / double(shots));
    d.shots.push_back(shots);
  }
  return d;
}

std::vector<RabiDataset> read_rabi_csv(std::istream& in, Transition fallback) {
  std::map<std::pair<int, std::string>, RabiDataset> groups;
  std::vector<std::pair<int, std::string>> order;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (cells.empty() || !is_number(cells[0])) continue;  // header
    if (cells.size() < 3) throw ConfigError("line " + std::to_string(lineno) + ": need t,probability,shots");
    const Transition t = cells.size() > 3 && !cells[3].empty() ? parse_transition(cells[3]) : fallback;
    const std::string mode = cells.size() > 4 ? cells[4] : "";
    const auto key = std::make_pair(int(t), mode);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) {
      order.push_back(key);
      it->second.transition = t;
      it->second.mode = mode;
    }
    try {
      it->second.times.push_back(std::stod(cells[0]));
      it->second.probabilities.push_back(std::stod(cells[1]));
      it->second.shots.push_back(std::stoull(cells[2]));
    } catch (const std::exception&) {
      throw ConfigError("line " + std::to_string(lineno) + ": malformed number");
    }
  }
  std::vector<RabiDataset> out;
  for (const auto& key : order) {
    groups[key].validate();
    out.push_back(std::move(groups[key]));
  }
  if (out.empty()) throw ConfigError("no Rabi data rows found");
  return out;
}

void write_rabi_csv(std::ostream& out, std::span<const RabiDataset> data) {
  out << std::setprecision(12) << "t_us,probability,shots,transition,mode\n";
  for (const auto& d : data)
    for (std::size_t i = 0; i < d.size(); ++i)
      out << d.times[i] << "," << d.probabilities[i] << "," << d.shots[i] << ","
          << to_string(d.transition) << "," << d.mode << "\n";
}

// ---------------------------------------------------------------------------

namespace {

struct Layout {
  bool has_carrier = false;
  bool fit_decay = false;
  int size() const { return 2 + int(has_carrier) + int(fit_decay); }
};

struct Problem {
  std::span<const RabiDataset> data;
  const FitOptions* options;
  Layout layout;

  RabiParams params(std::span<const double> x) const {
    RabiParams p;
    p.omega0 = x[1];
    p.eta = layout.has_carrier ? x[2] : options->eta;
    p.decay = layout.fit_decay ? x[std::size_t(layout.size() - 1)] : 0.0;
    p.ions = options->ions;
    return p;
  }

  std::vector<std::vector<double>> predict(std::span<const double> x) const {
    const RabiParams p = params(x);
    const auto pn = phonon_distribution(options->model, x[0]);
    std::vector<std::vector<double>> out;
    for (const auto& d : data) {
      std::vector<double> row;
      for (double t : d.times) {
        const double env = std::exp(-p.decay * t);
        double total = 0;
        for (std::size_t n = 0; n < pn.size(); ++n) {
          double s = 0.5 * (1 - env * std::cos(rabi_frequency(d.transition, int(n), p.eta, p.omega0) * t));
          if (p.ions == 2) s = 1 - (1 - s) * (1 - s);
          total += pn[n] * s;
        }
        row.push_back(total);
      }
      out.push_back(std::move(row));
    }
    return out;
  }

  double chi2(std::span<const double> x, const std::vector<std::vector<double>>& weights,
              const std::vector<std::vector<double>>& obs) const {
    const auto pred = predict(x);
    double s = 0;
    for (std::size_t k = 0; k < pred.size(); ++k)
      for (std::size_t i = 0; i < pred[k].size(); ++i) {
        const double r = pred[k][i] - obs[k][i];
        s += weights[k][i] * r * r;
      }
    return s;
  }

  std::vector<std::vector<double>> weights_from(const std::vector<std::vector<double>>& p) const {
    std::vector<std::vector<double>> w;
    for (std::size_t k = 0; k < data.size(); ++k) {
      std::vector<double> row;
      for (std::size_t i = 0; i < data[k].size(); ++i) {
        const double q = clamp_probability(p[k][i], data[k].shots[i]);
        row.push_back(double(data[k].shots[i]) / (q * (1 - q)));
      }
      w.push_back(std::move(row));
    }
    return w;
  }
};

struct SingleFit {
  std::vector<double> x;
  double chi2 = 0;
  int evaluations = 0;
  bool converged = false;
};

// Iteratively reweighted least squares: binomial weights from the current model.
SingleFit fit_once(const Problem& prob, const std::vector<std::vector<double>>& obs,
                   std::vector<double> x0, int rounds) {
  const Layout& L = prob.layout;
  NelderMeadOptions nm;
  nm.lower.assign(std::size_t(L.size()), 0.0);
  nm.upper.assign(std::size_t(L.size()), 1e6);
  nm.upper[0] = prob.options->nbar_max;
  nm.initial_step = {0.05, 0.05 * x0[1]};
  if (L.has_carrier) {
    nm.lower[2] = 1e-4;
    nm.upper[2] = 0.3 - 1e-9;
    nm.initial_step.push_back(0.1 * x0[2]);
  }
  if (L.fit_decay) nm.initial_step.push_back(0.01 * x0[1]);
  nm.max_evaluations = 4000;
  nm.x_tolerance = 1e-10;
  nm.f_tolerance = 1e-12;
  nm.restarts = 1;

  SingleFit out;
  out.x = std::move(x0);
  auto weights = prob.weights_from(obs);
  for (int r = 0; r < rounds; ++r) {
    const auto res = nelder_mead([&](std::span<const double> x) { return prob.chi2(x, weights, obs); },
                                 out.x, nm);
    out.x = res.x;
    out.evaluations += res.evaluations;
    out.converged = res.converged;
    weights = prob.weights_from(prob.predict(out.x));
  }
  const auto w = prob.weights_from(prob.predict(out.x));
  out.chi2 = prob.chi2(out.x, w, obs);
  return out;
}

}  // namespace

FitResult fit_phonon_number(std::span<const RabiDataset> data, const FitOptions& options) {
  if (data.empty()) throw FitError("no datasets to fit");
  if (!(options.eta > 0 && options.eta < 0.3)) throw ConfigError("Lamb-Dicke parameter must be in (0, 0.3)");
  if (options.ions != 1 && options.ions != 2) throw ConfigError("ions must be 1 or 2");
  if (!(options.confidence > 0 && options.confidence < 1)) throw ConfigError("confidence must be in (0, 1)");
  std::size_t points = 0;
  double pmin = 1, pmax = 0, tmax = 0;
  Layout layout;
  layout.fit_decay = options.fit_decay;
  std::vector<std::vector<double>> obs;
  for (const auto& d : data) {
    d.validate();
    points += d.size();
    for (std::size_t i = 0; i < d.size(); ++i) {
      pmin = std::min(pmin, d.probabilities[i]);
      pmax = std::max(pmax, d.probabilities[i]);
      tmax = std::max(tmax, d.times[i]);
    }
    if (d.transition == Transition::carrier) layout.has_carrier = true;
    obs.push_back(d.probabilities);
  }
  if (points < 10) throw FitError("need at least 10 data points");
  if (pmax - pmin < 1e-12) throw FitError("degenerate data: all probabilities are equal");
  if (!(tmax > 0)) throw FitError("all pulse times are zero");

  const Problem prob{data, &options, layout};

  // Coarse start: scan the sideband Rabi frequency for a few trial n-bar values.
  std::vector<double> x0(std::size_t(layout.size()), 0.0);
  if (layout.has_carrier) x0[2] = options.eta;
  if (options.omega0 > 0) {
    x0[1] = options.omega0;
  } else {
    const auto w = prob.weights_from(obs);
    auto w_sb = w;  // sideband-only weights for the coupling scan
    for (std::size_t k = 0; k < data.size(); ++k)
      if (data[k].transition == Transition::carrier) std::fill(w_sb[k].begin(), w_sb[k].end(), 0.0);
    const double g_lo = 0.5 * kTwoPi / tmax;
    const double g_hi = kTwoPi * double(points) / tmax;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> trial = x0;
    for (double nbar : {0.0, 0.1, 0.5, 2.0}) {
      for (int k = 0; k <= 400; ++k) {
        const double g = g_lo * std::pow(g_hi / g_lo, k / 400.0);
        trial[0] = std::min(nbar, options.nbar_max);
        trial[1] = g / options.eta;
        const double c = prob.chi2(trial, w_sb, obs);
        if (c < best) {
          best = c;
          x0 = trial;
        }
      }
    }
    if (layout.has_carrier) {
      // Keep the sideband coupling and move eta so the carrier lines up.
      const double g = x0[1] * options.eta;
      trial = x0;
      best = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= 400; ++k) {
        trial[2] = 0.01 + (0.29 - 0.01) * k / 400.0;
        trial[1] = g / trial[2];
        const double c = prob.chi2(trial, w, obs);
        if (c < best) {
          best = c;
          x0 = trial;
        }
      }
    }
  }

  const SingleFit fit = fit_once(prob, obs, x0, 3);
  if (!fit.converged) throw FitError("phonon-number fit did not converge");

  FitResult r;
  r.model = options.model;
  r.nbar = fit.x[0];
  r.alpha = std::sqrt(r.nbar);
  r.omega0 = fit.x[1];
  r.eta = layout.has_carrier ? fit.x[2] : options.eta;
  r.eta_fitted = layout.has_carrier;
  r.decay = layout.fit_decay ? fit.x.back() : 0.0;
  r.chi2 = fit.chi2;
  r.dof = int(points) - layout.size();
  r.evaluations = fit.evaluations;

  double periods = 0;
  for (const auto& d : data) {
    const double w = rabi_frequency(d.transition, d.transition == Transition::rsb ? 1 : 0, r.eta, r.omega0);
    const auto [lo, hi] = std::minmax_element(d.times.begin(), d.times.end());
    periods = std::max(periods, (*hi - *lo) * w / kTwoPi);
  }
  if (periods < 2) throw FitError("data span fewer than two oscillation periods");

  // Parametric bootstrap from the fitted curves.
  const auto pred = prob.predict(fit.x);
  std::vector<double> samples;
  for (int b = 0; b < options.bootstrap; ++b) {
    std::mt19937_64 rng(child_seed(options.seed, std::uint64_t(b)));
    std::vector<std::vector<double>> resampled;
    for (std::size_t k = 0; k < data.size(); ++k) {
      std::vector<double> row;
      for (std::size_t i = 0; i < data[k].size(); ++i) {
        std::binomial_distribution<std::uint64_t> draw(data[k].shots[i], std::clamp(pred[k][i], 0.0, 1.0));
        row.push_back(double(draw(rng)) / double(data[k].shots[i]));
      }
      resampled.push_back(std::move(row));
    }
    samples.push_back(fit_once(prob, resampled, fit.x, 2).x[0]);
  }
  r.ci_low = r.ci_high = r.nbar;
  if (!samples.empty()) {
    std::sort(samples.begin(), samples.end());
    const auto quantile = [&](double q) {
      const double pos = q * double(samples.size() - 1);
      const auto i = std::size_t(pos);
      const double f = pos - double(i);
      return i + 1 < samples.size() ? samples[i] * (1 - f) + samples[i + 1] * f : samples[i];
    };
    const double a = 0.5 * (1 - options.confidence);
    r.ci_low = std::min(r.nbar, quantile(a));
    r.ci_high = std::max(r.nbar, quantile(1 - a));
    double mean = 0, var = 0;
    for (double s : samples) mean += s;
    mean /= double(samples.size());
    for (double s : samples) var += (s - mean) * (s - mean);
    r.nbar_std = samples.size() > 1 ? std::sqrt(var / double(samples.size() - 1)) : 0.0;
  }
  return r;
}

}  // namespace ionswap

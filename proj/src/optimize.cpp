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

#include "ionswap/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

#include "ionswap/errors.hpp"

namespace ionswap {

namespace {

struct Vertex {
  std::vector<double> x;
  double f = 0;
};

class Search {
 public:
  Search(const Objective& objective, const NelderMeadOptions& options, std::size_t dim)
      : objective_(objective), options_(options), dim_(dim) {}

  std::vector<double> clip(std::vector<double> x) const {
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!options_.lower.empty()) x[i] = std::max(x[i], options_.lower[i]);
      if (!options_.upper.empty()) x[i] = std::min(x[i], options_.upper[i]);
    }
    return x;
  }

  double evaluate(const std::vector<double>& x) {
    ++evaluations_;
    const double f = objective_(std::span<const double>(x));
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  }

  // Evaluates a batch, concurrently if allowed; results ordered as input.
  void evaluate(std::vector<Vertex>& batch) {
    if (options_.workers <= 1 || batch.size() < 2) {
      for (auto& v : batch) v.f = evaluate(v.x);
      return;
    }
    std::vector<std::future<double>> pending;
    std::size_t next = 0;
    while (next < batch.size()) {
      pending.clear();
      const std::size_t end =
          std::min(batch.size(), next + static_cast<std::size_t>(options_.workers));
      for (std::size_t i = next; i < end; ++i) {
        pending.push_back(std::async(std::launch::async, [this, &batch, i] {
          const double f = objective_(std::span<const double>(batch[i].x));
          return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
        }));
      }
      for (std::size_t i = next; i < end; ++i) batch[i].f = pending[i - next].get();
      evaluations_ += static_cast<int>(end - next);
      next = end;
    }
  }

  int evaluations() const { return evaluations_; }

 private:
  const Objective& objective_;
  const NelderMeadOptions& options_;
  std::size_t dim_;
  int evaluations_ = 0;
};

}  // namespace

OptimizeResult nelder_mead(const Objective& objective, std::vector<double> x0,
                           const NelderMeadOptions& options) {
  const std::size_t dim = x0.size();
  if (dim == 0) throw ConfigError("optimizer needs at least one free parameter");
  if ((!options.lower.empty() && options.lower.size() != dim) ||
      (!options.upper.empty() && options.upper.size() != dim))
    throw ConfigError("optimizer bounds do not match parameter count");

  Search search(objective, options, dim);
  x0 = search.clip(std::move(x0));
  const double f0 = search.evaluate(x0);
  if (!std::isfinite(f0)) throw FitError("objective is not finite at the initial point");

  OptimizeResult result;
  result.x = x0;
  result.value = f0;
  result.initial_value = f0;
  if (f0 <= options.target) {
    result.evaluations = search.evaluations();
    result.converged = true;
    return result;
  }

  std::vector<double> step(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    step[i] = options.initial_step.empty()
                  ? (x0[i] != 0.0 ? 0.1 * std::abs(x0[i]) : 0.1)
                  : options.initial_step[i];
  }

  std::mt19937_64 rng(options.seed);
  std::bernoulli_distribution coin(0.5);
  int iteration = 0;

  auto log = [&](const std::string& what, int restart, const Vertex& best) {
    if (!options.on_iteration) return;
    options.on_iteration(
        {iteration, search.evaluations(), restart, best.f, best.x, what});
  };

  Vertex best{x0, f0};
  for (int restart = 0; restart <= options.restarts; ++restart) {
    // Build the simplex around the incumbent; restarts flip axis directions.
    std::vector<Vertex> simplex;
    simplex.push_back(best);
    std::vector<Vertex> fresh;
    for (std::size_t i = 0; i < dim; ++i) {
      Vertex v{best.x, 0};
      const double sign = restart == 0 ? 1.0 : (coin(rng) ? 1.0 : -1.0);
      v.x[i] += sign * step[i];
      v.x = search.clip(v.x);
      if (v.x[i] == best.x[i]) {
        v.x[i] = best.x[i] - sign * step[i];
        v.x = search.clip(v.x);
      }
      fresh.push_back(std::move(v));
    }
    search.evaluate(fresh);
    for (auto& v : fresh) simplex.push_back(std::move(v));
    log("restart", restart, best);

    bool converged = false;
    while (search.evaluations() < options.max_evaluations) {
      ++iteration;
      std::sort(simplex.begin(), simplex.end(),
                [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      if (simplex.front().f <= options.target) {
        converged = true;
        break;
      }
      double diameter = 0;
      for (std::size_t k = 1; k <= dim; ++k)
        for (std::size_t i = 0; i < dim; ++i)
          diameter = std::max(diameter, std::abs(simplex[k].x[i] - simplex[0].x[i]) /
                                            (1.0 + std::abs(simplex[0].x[i])));
      const double spread = simplex.back().f - simplex.front().f;
      if (diameter < options.x_tolerance ||
          (spread <= options.f_tolerance * (1.0 + std::abs(simplex.front().f)) &&
           diameter < 1e3 * options.x_tolerance)) {
        converged = true;
        break;
      }

      std::vector<double> centroid(dim, 0.0);
      for (std::size_t k = 0; k < dim; ++k)
        for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[k].x[i] / double(dim);
      auto along = [&](double t) {
        std::vector<double> x(dim);
        for (std::size_t i = 0; i < dim; ++i)
          x[i] = centroid[i] + t * (simplex.back().x[i] - centroid[i]);
        return search.clip(std::move(x));
      };

      Vertex reflected{along(-1.0), 0};
      reflected.f = search.evaluate(reflected.x);
      std::string what;
      if (reflected.f < simplex.front().f) {
        Vertex expanded{along(-2.0), 0};
        expanded.f = search.evaluate(expanded.x);
        simplex.back() = expanded.f < reflected.f ? expanded : reflected;
        what = expanded.f < reflected.f ? "expand" : "reflect";
      } else if (reflected.f < simplex[dim - 1].f) {
        simplex.back() = reflected;
        what = "reflect";
      } else {
        const bool outside = reflected.f < simplex.back().f;
        Vertex contracted{along(outside ? -0.5 : 0.5), 0};
        contracted.f = search.evaluate(contracted.x);
        if (contracted.f < std::min(reflected.f, simplex.back().f)) {
          simplex.back() = contracted;
          what = "contract";
        } else {
          std::vector<Vertex> shrunk;
          for (std::size_t k = 1; k <= dim; ++k) {
            Vertex v{simplex[k].x, 0};
            for (std::size_t i = 0; i < dim; ++i)
              v.x[i] = simplex[0].x[i] + 0.5 * (v.x[i] - simplex[0].x[i]);
            v.x = search.clip(v.x);
            shrunk.push_back(std::move(v));
          }
          search.evaluate(shrunk);
          for (std::size_t k = 1; k <= dim; ++k) simplex[k] = std::move(shrunk[k - 1]);
          what = "shrink";
        }
      }
      const auto& lowest = *std::min_element(
          simplex.begin(), simplex.end(),
          [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      log(what, restart, lowest.f < best.f ? lowest : best);
    }

    const auto& lowest = *std::min_element(
        simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const bool improved = lowest.f < best.f;
    if (improved) best = lowest;
    result.converged = converged;
    if (!converged || best.f <= options.target) break;
    if (restart > 0 && !improved) break;
    for (auto& s : step) s *= 0.5;
  }

  result.x = best.x;
  result.value = best.f;
  result.evaluations = search.evaluations();
  result.iterations = iteration;
  return result;
}

}  // namespace ionswap

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

#include <stdexcept>
#include <string>

namespace ionswap {

/// Invalid or inconsistent configuration (unknown channel, bad parameter).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root finding for trap constants failed.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ion escape, unstable configuration, non-converged equilibrium.
class PhysicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ion left the trap volume during integration.
class EscapeError : public PhysicsError {
 public:
  EscapeError(const std::string& what, double time_us) : PhysicsError(what), time_us_(time_us) {}
  double time_us() const { return time_us_; }

 private:
  double time_us_;
};

/// Mass-weighted Hessian has a non-positive eigenvalue.
class UnstableError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

/// Least-squares fit did not converge or data are degenerate.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ionswap

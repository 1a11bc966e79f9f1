// Copyright 2026 The freeflyer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace freeflyer {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (bad syntax, missing/ill-typed key).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A structurally parseable value violates a model/scenario invariant.
/// Carries the offending field path, e.g. "arms[0].links[1].mass".
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A cache was paired with a state other than the one it was built from.
class StaleCache : public Error {
 public:
  using Error::Error;
};

/// Locked-system inertia H0 not invertible; never expected for physical models.
class SingularH0 : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  IllConditioned(const std::string& message, double condition)
      : Error(message + " (condition number " + std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_ = 0.0;
};

class BadDuration : public Error {
 public:
  using Error::Error;
};

class SolveFailure : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf appeared in an integrated state.
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Wraps a module error with the simulation time at which it occurred.
class SimulationError : public Error {
 public:
  SimulationError(double time, const std::string& message)
      : Error("t=" + std::to_string(time) + " s: " + message), time_(time) {}
  double time() const { return time_; }

 private:
  double time_ = 0.0;
};

}  // namespace freeflyer

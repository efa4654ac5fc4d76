// Copyright 2026 The sngd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SNGD_ERROR_HPP
#define SNGD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sngd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the open domain of a function or parameter space.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorisation hit a non-positive pivot. Optimisers treat this
/// as "the step left the SPD cone" and backtrack.
class NotPositiveDefinite : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A linear system whose matrix is numerically singular.
class SingularSystem : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An iterative method exhausted its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A line search found no step that lowers the objective, which means the
/// search direction is not a descent direction (or the point is optimal to
/// working precision).
class NoDecrease : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sngd

#endif  // SNGD_ERROR_HPP

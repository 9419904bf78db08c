/*
 Copyright 2026 The akfrac Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace akfrac {

// Numeric values double as the CLI exit codes.
enum class ErrorKind { Validation = 1, Numerical = 2, Io = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

// Non-convergence, singular systems, overflow. Carries the grid node or the
// iteration at which the failure was detected when one is known.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what,
                          std::optional<std::size_t> node = std::nullopt,
                          std::optional<std::size_t> iteration = std::nullopt)
      : Error(ErrorKind::Numerical, what), node_(node), iteration_(iteration) {}

  std::optional<std::size_t> node() const noexcept { return node_; }
  std::optional<std::size_t> iteration() const noexcept { return iteration_; }

 private:
  std::optional<std::size_t> node_;
  std::optional<std::size_t> iteration_;
};

}  // namespace akfrac

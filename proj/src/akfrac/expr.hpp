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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace akfrac {

enum class VarKind { T, X, U, Lam, V };

/// Declared variable dimensions. Variables live in one flat environment:
/// slot 0 is t, then x1..xn, u1..um, lam1..lam_l, v1..v_k.
struct Dims {
  std::size_t n = 0;    // states x
  std::size_t m = 0;    // controls u
  std::size_t lam = 0;  // adjoints lam
  std::size_t v = 0;    // derivative placeholders v

  std::size_t size() const noexcept { return 1 + n + m + lam + v; }
  std::size_t slot(VarKind kind, std::size_t index = 0) const;
};

/// Immutable expression tree over the variables of a Dims.
class Expr {
 public:
  struct Node;

  /// Throws ValidationError on syntax errors (with byte offset), unknown
  /// identifiers and indices outside the declared dimensions.
  static Expr parse(std::string_view src, const Dims& dims);

  /// Evaluates on a flat environment of dims().size() values. Domain faults
  /// (ln of a non-positive value, division by zero, 0^negative) and non-finite
  /// intermediate results throw NumericalError.
  double eval(std::span<const double> env) const;

  /// Value and exact forward-mode derivatives with respect to the given slots.
  /// Non-differentiable points (abs or sqrt at 0) throw NumericalError.
  double gradient(std::span<const double> env, std::span<const std::size_t> wrt,
                  std::span<double> out) const;
  std::vector<double> derive(std::span<const double> env, std::span<const std::size_t> wrt) const;

  /// Canonical text; parse(to_string()) rebuilds an identical tree.
  std::string to_string() const;
  bool same_tree(const Expr& other) const;

  bool depends_on(VarKind kind) const;

  /// Same tree over `target`, with variables of kind `from` renamed to kind
  /// `to` (same component index). Throws ValidationError when a variable does
  /// not fit the target dimensions.
  Expr remap(const Dims& target, VarKind from, VarKind to) const;
  const Dims& dims() const noexcept { return dims_; }

 private:
  Expr(std::shared_ptr<const Node> root, Dims dims) : root_(std::move(root)), dims_(dims) {}

  std::shared_ptr<const Node> root_;
  Dims dims_;
};

}  // namespace akfrac

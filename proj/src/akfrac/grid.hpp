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
#include <functional>

#include <Eigen/Dense>

namespace akfrac {

/// Uniform grid t_j = a + j (b - a) / n, j = 0..n.
class Grid {
 public:
  Grid(double a, double b, std::size_t n);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ + 1; }
  double length() const noexcept { return b_ - a_; }
  double h() const noexcept { return (b_ - a_) / static_cast<double>(n_); }
  // The last node is pinned to b exactly.
  double t(std::size_t j) const noexcept {
    return j == n_ ? b_ : a_ + static_cast<double>(j) * h();
  }
  Eigen::VectorXd nodes() const;

  bool operator==(const Grid& o) const noexcept { return a_ == o.a_ && b_ == o.b_ && n_ == o.n_; }

 private:
  double a_;
  double b_;
  std::size_t n_;
};

/// Per-node samples: one row per node, one column per component.
class SampledFn {
 public:
  SampledFn(Grid grid, Eigen::MatrixXd values);

  static SampledFn zeros(const Grid& grid, Eigen::Index cols = 1);
  static SampledFn sample(const Grid& grid, const std::function<double(double)>& f);

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::Index cols() const noexcept { return values_.cols(); }
  Eigen::VectorXd column(Eigen::Index c = 0) const { return values_.col(c); }
  double operator()(std::size_t node, Eigen::Index c = 0) const {
    return values_(static_cast<Eigen::Index>(node), c);
  }

 private:
  Grid grid_;
  Eigen::MatrixXd values_;
};

/// Throws ValidationError when the two grids differ.
void require_same_grid(const Grid& g1, const Grid& g2, const char* what);

/// Composite trapezoid rule over the grid.
double trapezoid(const Grid& grid, const Eigen::VectorXd& v);

/// Second-order finite-difference derivative: central inside, one-sided
/// three-point at both ends. Applied column by column.
Eigen::MatrixXd fd_derivative(const Grid& grid, const Eigen::MatrixXd& v);
SampledFn fd_derivative(const SampledFn& x);

}  // namespace akfrac

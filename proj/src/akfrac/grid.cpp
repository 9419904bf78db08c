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

#include "akfrac/grid.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "akfrac/error.hpp"

namespace akfrac {

Grid::Grid(double a, double b, std::size_t n) : a_(a), b_(b), n_(n) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) {
    std::ostringstream os;
    os << "grid interval must satisfy a < b, got [" << a << ", " << b << "]";
    throw ValidationError(os.str());
  }
  if (n < 2) throw ValidationError("grid needs at least 2 subintervals");
}

Eigen::VectorXd Grid::nodes() const {
  Eigen::VectorXd t(static_cast<Eigen::Index>(size()));
  for (std::size_t j = 0; j <= n_; ++j) t(static_cast<Eigen::Index>(j)) = this->t(j);
  return t;
}

SampledFn::SampledFn(Grid grid, Eigen::MatrixXd values) : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != static_cast<Eigen::Index>(grid_.size())) {
    std::ostringstream os;
    os << "sampled function has " << values_.rows() << " rows, grid has " << grid_.size()
       << " nodes";
    throw ValidationError(os.str());
  }
  if (!values_.allFinite()) throw ValidationError("sampled function contains non-finite values");
}

SampledFn SampledFn::zeros(const Grid& grid, Eigen::Index cols) {
  return SampledFn(grid, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()), cols));
}

SampledFn SampledFn::sample(const Grid& grid, const std::function<double(double)>& f) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(grid.size()), 1);
  for (std::size_t j = 0; j < grid.size(); ++j) v(static_cast<Eigen::Index>(j), 0) = f(grid.t(j));
  return SampledFn(grid, std::move(v));
}

void require_same_grid(const Grid& g1, const Grid& g2, const char* what) {
  if (!(g1 == g2)) throw ValidationError(std::string("grid mismatch in ") + what);
}

double trapezoid(const Grid& grid, const Eigen::VectorXd& v) {
  if (v.size() != static_cast<Eigen::Index>(grid.size()))
    throw ValidationError("trapezoid: sample count does not match grid");
  const Eigen::Index n = v.size() - 1;
  return grid.h() * (v.sum() - 0.5 * (v(0) + v(n)));
}

Eigen::MatrixXd fd_derivative(const Grid& grid, const Eigen::MatrixXd& v) {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.n());
  if (v.rows() != n + 1) throw ValidationError("fd_derivative: sample count does not match grid");
  const double h = grid.h();
  Eigen::MatrixXd d(v.rows(), v.cols());
  for (Eigen::Index k = 1; k < n; ++k) d.row(k) = (v.row(k + 1) - v.row(k - 1)) / (2.0 * h);
  d.row(0) = (-3.0 * v.row(0) + 4.0 * v.row(1) - v.row(2)) / (2.0 * h);
  d.row(n) = (3.0 * v.row(n) - 4.0 * v.row(n - 1) + v.row(n - 2)) / (2.0 * h);
  return d;
}

SampledFn fd_derivative(const SampledFn& x) {
  return SampledFn(x.grid(), fd_derivative(x.grid(), x.values()));
}

}  // namespace akfrac

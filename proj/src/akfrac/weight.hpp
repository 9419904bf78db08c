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

#include <vector>

#include <Eigen/Dense>

#include "akfrac/grid.hpp"
#include "akfrac/kernel.hpp"

namespace akfrac {

/// w(t) = (b - t)^(alpha - 1) A((b - t)^beta) / (Gamma(alpha) A(1)), kept in
/// factored form. Integrals of w against piecewise-linear data are done by
/// product integration, so the singular value at t = b is never sampled.
class EndpointWeight {
 public:
  EndpointWeight(const AnalyticKernel& kernel, const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  const AnalyticKernel& kernel() const noexcept { return kernel_; }

  /// Pointwise value; throws NumericalError at t = b when alpha < 1.
  double operator()(double t) const;
  bool singular() const noexcept { return kernel_.alpha() < 1.0; }

  /// Gamma(alpha) A(1), the factor relating w to the row t = b of the
  /// left-sided plan.
  double scale() const noexcept { return scale_; }

  /// Cell c = [t_c, t_{c+1}]: weight of node c (left) and of node c+1 (right).
  const std::vector<double>& left_cell() const noexcept { return wl_; }
  const std::vector<double>& right_cell() const noexcept { return wr_; }

  /// Node density: the product-integration weight of node k divided by its
  /// trapezoid weight. Equals w(t_k) up to O(h^2) away from b and stays finite
  /// at b; identically 1 in the classical case.
  Eigen::VectorXd node_density() const;

  /// int_a^b w phi for piecewise-linear phi given by node values.
  double integrate(const Eigen::VectorXd& phi) const;

  /// Row k: int_{t_k}^b w phi, for each column of phi.
  Eigen::MatrixXd tail_integrals(const Eigen::MatrixXd& phi) const;

 private:
  AnalyticKernel kernel_;
  Grid grid_;
  double scale_ = 1.0;
  std::vector<double> wl_, wr_;
};

/// RL_right[w psi] at the nodes: -d/dt of Abar I^{1-alpha}_{b-}[w psi],
/// where the inner integral pairs the two endpoint singularities by
/// quadrature (tanh-sinh on singular cells) and the outer derivative is a
/// finite difference. For alpha = 1 this is -(w psi)' / A(1). The value at
/// node n is a one-sided difference and carries no pointwise meaning when
/// alpha < 1.
Eigen::MatrixXd rl_right_weighted(const EndpointWeight& w, const Eigen::MatrixXd& psi);

/// The inner integral F = Abar I^{1-alpha}_{b-}[w psi] itself; F(b) is the
/// limit psi(b) / (Gamma(alpha) A(1)).
Eigen::MatrixXd right_integral_weighted(const EndpointWeight& w, const Eigen::MatrixXd& psi);

}  // namespace akfrac

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
#include <vector>

#include <Eigen/Dense>

#include "akfrac/grid.hpp"
#include "akfrac/kernel.hpp"

namespace akfrac {

enum class Side { Left, Right };

/// Product-integration weights of one power kernel r^(mu-1) over the cell
/// r in [r0, r0 + h], split between the hat function peaking at r0 (near) and
/// the one peaking at r0 + h (far).
struct CellWeights {
  double near = 0.0;
  double far = 0.0;
};

CellWeights power_cell_weights(double mu, double r0, double h);

/// Discretized general-kernel integral on a uniform grid:
/// (op x)(t_k) ~ sum_j W[k, j] x(t_j), with
/// W = sum_{n <= truncation} a_n Gamma(beta n + order) W_RL(order + n beta).
///
/// The weights depend only on k - j (plus a boundary column), so storage is
/// O(n). Right-sided plans are the mirror image of the left-sided one.
class OperatorPlan {
 public:
  const AnalyticKernel& kernel() const noexcept { return kernel_; }
  const Grid& grid() const noexcept { return grid_; }
  Side side() const noexcept { return side_; }
  double order() const noexcept { return order_; }
  std::size_t truncation() const noexcept { return truncation_; }
  double tail_estimate() const noexcept { return tail_estimate_; }

  double weight(std::size_t k, std::size_t j) const noexcept;
  Eigen::MatrixXd dense() const;

  /// Column-by-column product with W.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  SampledFn apply(const SampledFn& x) const;

 private:
  friend OperatorPlan build_plan(const AnalyticKernel&, const Grid&, Side, double,
                                 std::optional<std::size_t>);
  OperatorPlan(AnalyticKernel kernel, Grid grid, Side side, double order, std::size_t truncation);

  double left_weight(std::size_t k, std::size_t j) const noexcept;
  Eigen::MatrixXd apply_left(const Eigen::MatrixXd& x) const;

  AnalyticKernel kernel_;
  Grid grid_;
  Side side_;
  double order_;
  std::size_t truncation_;
  double tail_estimate_ = 0.0;
  double diag_ = 0.0;
  std::vector<double> lag_;    // lag_[d]: weight of node k - d, 1 <= d < k
  std::vector<double> first_;  // first_[k]: weight of node 0 in row k
};

/// Plan for the kernel's coefficients realized at `order`. The default
/// truncation keeps every stored coefficient.
OperatorPlan build_plan(const AnalyticKernel& kernel, const Grid& grid, Side side, double order,
                        std::optional<std::size_t> n_trunc = std::nullopt);

/// Plan at the kernel's own order alpha.
OperatorPlan build_plan(const AnalyticKernel& kernel, const Grid& grid, Side side);

/// Independent evaluation of the same integral: Gauss-Legendre on each cell of
/// the piecewise-linear interpolant of x against the full kernel weight, with
/// tanh-sinh on the cell touching the evaluation point.
SampledFn direct_integral(const AnalyticKernel& kernel, const Grid& grid, Side side, double order,
                          const SampledFn& x);

/// Caputo derivative. For alpha < 1 this is +-(Abar-plan of order 1 - alpha)
/// applied to x'; for alpha = 1, beta = 0 it is +-x' / A(1). The minus sign
/// belongs to the right side. x' defaults to second-order finite differences.
SampledFn caputo_derivative(const AnalyticKernel& kernel, const Grid& grid, Side side,
                            const SampledFn& x,
                            const std::optional<SampledFn>& x_deriv = std::nullopt);

/// Riemann-Liouville derivative: +-d/dt of the Abar-plan of order 1 - alpha
/// applied to x, the outer derivative by finite differences.
SampledFn rl_derivative(const AnalyticKernel& kernel, const Grid& grid, Side side,
                        const SampledFn& x);

/// |int x (I_left y) - int y (I_right x)| with trapezoid outer integrals.
double duality_residual(const AnalyticKernel& kernel, const Grid& grid, double order,
                        const SampledFn& x, const SampledFn& y);

/// Integration-by-parts residual
///   |int x C_left(y) - [y F]_a^b - int y RL_right(x)|,  F = Abar I_right^{1-alpha} x.
/// The last integral pairs each cell's exact increment of F with the cell
/// average of y, so the singular endpoint value of RL_right(x) is never sampled.
double ibp_residual(const AnalyticKernel& kernel, const Grid& grid, const SampledFn& x,
                    const SampledFn& y, const std::optional<SampledFn>& y_deriv = std::nullopt);

/// How the order-k alpha integral in the Gronwall series picks its kernel.
enum class GronwallFamily {
  Fixed,  // same coefficients at every order
  Gamma,  // a_n Gamma(alpha + n beta) / Gamma(k alpha + n beta)
};

struct GronwallResult {
  SampledFn bound;
  std::size_t terms = 0;        // number of k >= 1 terms summed
  double tail_estimate = 0.0;   // geometric bound on the omitted terms
  SemigroupReport semigroup;    // coefficient condition for the chosen family
  bool semigroup_warning = false;
};

/// a(t) + sum_{k=1}^{k_max} g(t)^k (I^{k alpha} a)(t). Stops early once a term's
/// sup-norm drops below 1e-14.
GronwallResult gronwall_bound(const AnalyticKernel& kernel, const Grid& grid, const SampledFn& a,
                              const SampledFn& g, std::size_t k_max,
                              GronwallFamily family = GronwallFamily::Gamma);

/// True iff u <= bound + tol at every node.
bool verify_gronwall(const SampledFn& u, const SampledFn& bound, double tol = 1e-9);

/// Reverse the node order of every column (t -> a + b - t).
Eigen::MatrixXd reflect(const Eigen::MatrixXd& x);

}  // namespace akfrac

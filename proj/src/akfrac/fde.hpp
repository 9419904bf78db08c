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
#include <utility>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "akfrac/expr.hpp"
#include "akfrac/fracops.hpp"
#include "akfrac/grid.hpp"
#include "akfrac/kernel.hpp"
#include "akfrac/weight.hpp"

namespace akfrac {

/// C D^{alpha,beta}_{a+} x = f(t, x, u), x(a) = x_a, on a uniform grid.
struct ControlSystem {
  AnalyticKernel kernel;
  Grid grid;
  std::vector<Expr> f;  // over (t, x1..xn, u1..um)
  Eigen::VectorXd x_a;
  std::size_t n_controls = 0;

  std::size_t n_states() const noexcept { return f.size(); }
  Dims dims() const noexcept { return Dims{f.size(), n_controls, 0, 0}; }
};

/// Parses the dynamics and checks dimensions and the kernel/interval pairing.
ControlSystem make_control_system(const AnalyticKernel& kernel, const Grid& grid,
                                  const std::vector<std::string>& dynamics, Eigen::VectorXd x_a,
                                  std::size_t n_controls);

/// Flat expression environment (t, x, u) for one node.
std::vector<double> node_env(const Dims& dims, double t, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                             const Eigen::Ref<const Eigen::RowVectorXd>& u);

/// f at every node, one row per node.
Eigen::MatrixXd eval_dynamics(const ControlSystem& sys, const SampledFn& x, const SampledFn& u);

/// Jacobians d f_i / d x_j (n x n) and d f_i / d u_j (n x m) at one node.
struct Jacobians {
  Eigen::MatrixXd fx, fu;
};
Jacobians dynamics_jacobians(const ControlSystem& sys, double t, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                             const Eigen::Ref<const Eigen::RowVectorXd>& u);

struct ForwardResult {
  SampledFn x;
  double residual = 0.0;          // sup-norm of x - x_a - W f(x, u), re-evaluated
  std::size_t max_inner_iter = 0;  // worst Picard count over the nodes
};

/// Solves x = x_a + (A I^{alpha,beta}_{a+} f(., x, u)) node by node with the
/// product-integration plan; the implicit diagonal term is resolved by Picard
/// iteration, damped by 0.5 once successive steps stop shrinking.
ForwardResult solve_forward(const ControlSystem& sys, const SampledFn& u, double tol = 1e-12,
                            std::size_t max_iter = 200);

/// sup_k |x_k - x_a - sum_j W[k, j] f_j|.
double volterra_residual(const ControlSystem& sys, const SampledFn& x, const SampledFn& u);

/// Linearized system C D eta = J_x eta + J_u h, eta(a) = 0, along (x, u).
SampledFn solve_variational(const ControlSystem& sys, const SampledFn& x, const SampledFn& u,
                            const SampledFn& h);

struct AdjointResult {
  SampledFn lambda;
  double equation_residual = 0.0;
  double transversality = 0.0;
};

/// Right-sided adjoint in integrated form:
///   (Abar I^{1-alpha}_{b-} lambda)(t) = int_t^b [w source + J_x^T lambda] ds,
/// with the transversality condition (Abar I^{1-alpha}_{b-} lambda)(b) = 0.
/// `source` holds the node values of lambda0 grad_x L (the w factor is applied
/// by product integration). Components with a value in `frozen` are held
/// constant and their equations dropped. The last row of the discrete right
/// operator vanishes, so lambda(b) is closed by lambda_n = 0 for the free
/// components (the alpha -> 1 limit of the transversality condition).
AdjointResult solve_adjoint(const ControlSystem& sys, const SampledFn& x, const SampledFn& u,
                            const EndpointWeight& w, const Eigen::MatrixXd& source,
                            const std::vector<std::optional<double>>& frozen = {});

/// Exact adjoint of the discrete forward scheme for the objective
/// sum_k omega_k Ltilde_k + sum_i c_i int f_i (omega: product-integration node
/// weights of w, c: frozen values). Scaled by the trapezoid weights so that
/// d J / d u_k = tau_k (node_density_k grad_u Ltilde_k + J_u^T lambda_k).
/// `grad` holds grad_x Ltilde at the nodes. Approximates the same lambda as
/// solve_adjoint; the sweep uses it because it is consistent with the
/// discrete objective.
SampledFn solve_discrete_adjoint(const ControlSystem& sys, const SampledFn& x, const SampledFn& u,
                                 const EndpointWeight& w, const Eigen::MatrixXd& grad,
                                 const std::vector<std::optional<double>>& frozen = {});

/// Residuals of the same discrete adjoint equation at a given lambda:
/// {sup over rows k < n and free components, |(Abar I lambda)(b)|}.
std::pair<double, double> adjoint_residual(const ControlSystem& sys, const SampledFn& x, const SampledFn& u,
                                           const EndpointWeight& w, const Eigen::MatrixXd& source,
                                           const SampledFn& lambda,
                                           const std::vector<std::optional<double>>& frozen = {});

}  // namespace akfrac

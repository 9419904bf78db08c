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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "akfrac/expr.hpp"
#include "akfrac/fde.hpp"
#include "akfrac/grid.hpp"
#include "akfrac/weight.hpp"

namespace akfrac {

/// Maximize int_a^b w(t) L(t, x, u) dt subject to the control system.
///
/// Two optional extras serve the variational reductions:
///   terminal  nu: adds nu . x(b) to the objective;
///   frozen    c_i: holds the i-th multiplier at the constant c_i and adds
///             c_i int f_i dt to the objective.
struct OCProblem {
  ControlSystem system;
  Expr L;
  Eigen::VectorXd terminal;
  std::vector<std::optional<double>> frozen;
};

OCProblem make_oc_problem(ControlSystem system, const std::string& lagrangian);

struct Candidate {
  SampledFn x;
  SampledFn u;
  SampledFn lambda;
  double lambda0 = 1.0;
};

struct ResidualReport {
  double opt_res = 0.0;
  double adj_res = 0.0;
  double trans_res = 0.0;
  double dynamics_res = 0.0;
  bool nontriviality = true;
  double J = 0.0;
};

/// Node gradients of Ltilde = L + Gamma(alpha) A(1) nu . f, the integrand the
/// terminal term folds into.
struct LagrangianGradients {
  Eigen::MatrixXd x;  // (n+1) x n_states
  Eigen::MatrixXd u;  // (n+1) x n_controls
};
LagrangianGradients lagrangian_gradients(const OCProblem& p, const EndpointWeight& w, const SampledFn& x,
                                         const SampledFn& u);

/// Product-integrated objective plus the terminal and frozen-multiplier terms.
double objective(const OCProblem& p, const SampledFn& x, const SampledFn& u);

/// H = lambda0 w(t) Ltilde + lambda . f. Throws at t = b when w is singular.
double hamiltonian(const OCProblem& p, const EndpointWeight& w, double t, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& u, double lambda0, const Eigen::VectorXd& lambda);

/// grad_u H at every node, with w(t_k) taken as the product-integrated node
/// density so the singular weight is never sampled. The row at t = b is
/// filled even when w is singular; optimality_nodes() says which rows count.
Eigen::MatrixXd hamiltonian_gradient_u(const OCProblem& p, const EndpointWeight& w, const SampledFn& x,
                                       const SampledFn& u, double lambda0, const SampledFn& lambda);

/// Nodes where the optimality condition is enforced: all of them in the
/// classical case, all but b otherwise.
std::size_t optimality_nodes(const OCProblem& p);

ResidualReport check_pmp(const OCProblem& p, const Candidate& c);

struct SweepOptions {
  double step = 0.5;
  double tol = 1e-8;
  std::size_t max_iter = 500;
  std::size_t max_halvings = 20;
  std::optional<SampledFn> x0;  // warm-start state for the first sweep
};

struct SweepRecord {
  double J = 0.0;
  double opt_res = 0.0;
};

struct SweepResult {
  Candidate candidate;
  std::vector<SweepRecord> history;
  std::size_t iterations = 0;  // accepted control updates
  bool converged = false;
};

/// Forward-backward sweep with lambda0 = 1: state forward, adjoint backward
/// (the discrete adjoint of the forward scheme), gradient ascent on u along
/// grad_u H with backtracking halving.
SweepResult solve_ocp(const OCProblem& p, const SampledFn& u0, const SweepOptions& opt = {});

}  // namespace akfrac

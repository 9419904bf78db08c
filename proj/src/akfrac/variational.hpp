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
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "akfrac/expr.hpp"
#include "akfrac/grid.hpp"
#include "akfrac/kernel.hpp"
#include "akfrac/pmp.hpp"

namespace akfrac {

/// Maximize int w L(t, x, C D x) dt with x(a) = x_a, x(b) = x_b. L is written
/// over (t, x1..xn, v1..vn), v standing for the Caputo derivative of x.
struct CoVProblem {
  AnalyticKernel kernel;
  Grid grid;
  Expr L;
  Eigen::VectorXd x_a, x_b;

  std::size_t n() const noexcept { return static_cast<std::size_t>(x_a.size()); }
  Dims dims() const noexcept { return Dims{n(), 0, 0, n()}; }
};

CoVProblem make_cov_problem(const AnalyticKernel& kernel, const Grid& grid, const std::string& lagrangian,
                            Eigen::VectorXd x_a, Eigen::VectorXd x_b);

/// RL_right[w grad_v L] + w grad_x L along x, with v = C D x. Row n (t = b) is
/// zero when alpha < 1: neither term has a pointwise value there.
SampledFn el_residual(const CoVProblem& p, const SampledFn& x);

/// The same left-hand side reached through the control reduction f = u:
/// lambda = -w grad_u L from the optimality condition, fed to the adjoint
/// equation RL_right lambda = grad_x H. Returned with the sign of el_residual.
SampledFn pmp_reduction_residual(const CoVProblem& p, const SampledFn& x);

/// Augmented residual RL_right[grad_v(w L + lambda y)] + grad_x(w L + lambda y).
SampledFn augmented_el_residual(const CoVProblem& p, const Expr& y, double lambda, const SampledFn& x);

/// Control-problem form of a CoV problem: states x, controls u = C D x,
/// dynamics f = u and L with v renamed to u.
OCProblem cov_as_ocp(const CoVProblem& p);

struct IsoProblem {
  CoVProblem base;
  Expr y;  // over (t, x, v)
  double l = 0.0;
};

IsoProblem make_iso_problem(CoVProblem base, const std::string& constraint, double l);

struct IsoOptions {
  double tol = 1e-8;             // constraint defect and x(b) mismatch
  std::size_t max_outer = 100;   // multiplier updates
  std::size_t max_newton = 20;   // terminal-multiplier iterations per inner solve
  SweepOptions sweep;
};

struct IsoResult {
  SampledFn x;  // states x (z dropped)
  SampledFn u;
  double lambda = 0.0;
  double defect = 0.0;         // z(b) - l
  double boundary_defect = 0.0;  // sup |x(b) - x_b|
  double opt_res = 0.0;        // inner sweep optimality residual
  double el_res = 0.0;         // sup of the augmented residual over rows 3..n-3
  double lambda_rl_res = 0.0;  // sup |RL_right lambda| for the constant lambda
  bool degenerate = false;     // lambda ~ 0: the constraint is inactive
  Eigen::VectorXd nu;          // terminal multiplier enforcing x(b) = x_b
  std::size_t outer_iterations = 0;
};

/// Shoots the constant multiplier lambda of the constraint state z
/// (C D z = y, z(a) = 0) until z(b) = l, by Illinois false position inside
/// `bracket`. Each inner problem is the augmented control problem solved by
/// the sweep, with x(b) = x_b imposed by a terminal multiplier found by Newton.
IsoResult solve_isoperimetric(const IsoProblem& p, std::pair<double, double> bracket, const IsoOptions& opt = {});

}  // namespace akfrac

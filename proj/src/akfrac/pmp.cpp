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

#include "akfrac/pmp.hpp"

#include <cmath>
#include <sstream>
#include <tuple>

#include "akfrac/error.hpp"

namespace akfrac {

namespace {

using Index = Eigen::Index;

std::vector<std::size_t> slots(const Dims& d) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < d.n; ++i) s.push_back(d.slot(VarKind::X, i));
  for (std::size_t i = 0; i < d.m; ++i) s.push_back(d.slot(VarKind::U, i));
  return s;
}

bool has_terminal(const OCProblem& p) { return p.terminal.size() > 0; }

double sup_rows(const Eigen::MatrixXd& m, std::size_t rows) {
  if (rows == 0 || m.cols() == 0) return 0.0;
  return m.topRows(static_cast<Index>(rows)).cwiseAbs().maxCoeff();
}

}  // namespace

OCProblem make_oc_problem(ControlSystem system, const std::string& lagrangian) {
  const Dims d = system.dims();
  Expr L = Expr::parse(lagrangian, d);
  return OCProblem{std::move(system), std::move(L), Eigen::VectorXd(), {}};
}

LagrangianGradients lagrangian_gradients(const OCProblem& p, const EndpointWeight& w, const SampledFn& x,
                                         const SampledFn& u) {
  const ControlSystem& sys = p.system;
  const Dims d = sys.dims();
  const auto n = static_cast<Index>(d.n);
  const auto m = static_cast<Index>(d.m);
  const auto N = static_cast<Index>(sys.grid.size());
  const auto wrt = slots(d);
  LagrangianGradients out{Eigen::MatrixXd(N, n), Eigen::MatrixXd(N, m)};
  std::vector<double> g(wrt.size());
  for (Index k = 0; k < N; ++k) {
    const double t = sys.grid.t(static_cast<std::size_t>(k));
    try {
      p.L.gradient(node_env(d, t, x.values().row(k), u.values().row(k)), wrt, g);
    } catch (const NumericalError& e) {
      throw NumericalError(e.what(), static_cast<std::size_t>(k));
    }
    for (Index i = 0; i < n; ++i) out.x(k, i) = g[static_cast<std::size_t>(i)];
    for (Index i = 0; i < m; ++i) out.u(k, i) = g[static_cast<std::size_t>(n + i)];
    if (has_terminal(p)) {
      const Jacobians J = dynamics_jacobians(sys, t, x.values().row(k), u.values().row(k));
      out.x.row(k) += w.scale() * (J.fx.transpose() * p.terminal).transpose();
      out.u.row(k) += w.scale() * (J.fu.transpose() * p.terminal).transpose();
    }
  }
  return out;
}

double objective(const OCProblem& p, const SampledFn& x, const SampledFn& u) {
  const ControlSystem& sys = p.system;
  const Dims d = sys.dims();
  const auto N = static_cast<Index>(sys.grid.size());
  require_same_grid(sys.grid, x.grid(), "state");
  require_same_grid(sys.grid, u.grid(), "control");
  Eigen::VectorXd Lv(N);
  for (Index k = 0; k < N; ++k) {
    try {
      Lv(k) = p.L.eval(node_env(d, sys.grid.t(static_cast<std::size_t>(k)), x.values().row(k), u.values().row(k)));
    } catch (const NumericalError& e) {
      throw NumericalError(e.what(), static_cast<std::size_t>(k));
    }
  }
  const EndpointWeight w(sys.kernel, sys.grid);
  double J = w.integrate(Lv);
  if (has_terminal(p)) J += p.terminal.dot(x.values().row(N - 1).transpose());
  bool any_frozen = false;
  for (const auto& c : p.frozen) any_frozen = any_frozen || c.has_value();
  if (any_frozen) {
    const Eigen::MatrixXd F = eval_dynamics(sys, x, u);
    for (std::size_t i = 0; i < p.frozen.size(); ++i)
      if (p.frozen[i]) J += *p.frozen[i] * trapezoid(sys.grid, F.col(static_cast<Index>(i)));
  }
  return J;
}

double hamiltonian(const OCProblem& p, const EndpointWeight& w, double t, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& u, double lambda0, const Eigen::VectorXd& lambda) {
  const ControlSystem& sys = p.system;
  const auto env = node_env(sys.dims(), t, x.transpose(), u.transpose());
  Eigen::VectorXd f(static_cast<Index>(sys.n_states()));
  for (std::size_t i = 0; i < sys.n_states(); ++i) f(static_cast<Index>(i)) = sys.f[i].eval(env);
  double Lt = p.L.eval(env);
  if (has_terminal(p)) Lt += w.scale() * p.terminal.dot(f);
  const double running = lambda0 == 0.0 ? 0.0 : lambda0 * w(t) * Lt;
  return running + lambda.dot(f);
}

std::size_t optimality_nodes(const OCProblem& p) {
  const Grid& g = p.system.grid;
  return p.system.kernel.alpha() < 1.0 ? g.n() : g.size();
}

Eigen::MatrixXd hamiltonian_gradient_u(const OCProblem& p, const EndpointWeight& w, const SampledFn& x,
                                       const SampledFn& u, double lambda0, const SampledFn& lambda) {
  const ControlSystem& sys = p.system;
  require_same_grid(sys.grid, lambda.grid(), "adjoint");
  const LagrangianGradients lg = lagrangian_gradients(p, w, x, u);
  const Eigen::VectorXd density = w.node_density();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(lg.u.rows(), lg.u.cols());
  for (std::size_t k = 0; k < sys.grid.size(); ++k) {
    const auto i = static_cast<Index>(k);
    const double t = sys.grid.t(k);
    const Jacobians J = dynamics_jacobians(sys, t, x.values().row(i), u.values().row(i));
    G.row(i) = (J.fu.transpose() * lambda.values().row(i).transpose()).transpose();
    if (lambda0 != 0.0) G.row(i) += lambda0 * density(i) * lg.u.row(i);
  }
  return G;
}

ResidualReport check_pmp(const OCProblem& p, const Candidate& c) {
  const ControlSystem& sys = p.system;
  if (c.lambda0 != 0.0 && c.lambda0 != 1.0) throw ValidationError("lambda0 must be 0 or 1");
  if (static_cast<std::size_t>(c.lambda.cols()) != sys.n_states())
    throw ValidationError("candidate multiplier has the wrong column count");
  const EndpointWeight w(sys.kernel, sys.grid);
  ResidualReport r;
  const Eigen::MatrixXd G = hamiltonian_gradient_u(p, w, c.x, c.u, c.lambda0, c.lambda);
  r.opt_res = sup_rows(G, optimality_nodes(p));
  const LagrangianGradients lg = lagrangian_gradients(p, w, c.x, c.u);
  std::tie(r.adj_res, r.trans_res) =
      adjoint_residual(sys, c.x, c.u, w, c.lambda0 * lg.x, c.lambda, p.frozen);
  r.dynamics_res = volterra_residual(sys, c.x, c.u);
  r.nontriviality = c.lambda0 != 0.0 || c.lambda.values().cwiseAbs().maxCoeff() > 0.0;
  r.J = objective(p, c.x, c.u);
  return r;
}

SweepResult solve_ocp(const OCProblem& p, const SampledFn& u0, const SweepOptions& opt) {
  const ControlSystem& sys = p.system;
  if (!(opt.step > 0.0)) throw ValidationError("sweep step must be positive");
  if (!(opt.tol > 0.0)) throw ValidationError("sweep tolerance must be positive");
  require_same_grid(sys.grid, u0.grid(), "initial control");
  if (static_cast<std::size_t>(u0.cols()) != sys.n_controls)
    throw ValidationError("initial control has the wrong column count");
  const EndpointWeight w(sys.kernel, sys.grid);
  const std::size_t rows = optimality_nodes(p);

  SampledFn u = u0;
  SampledFn x = opt.x0 ? *opt.x0 : solve_forward(sys, u).x;
  require_same_grid(sys.grid, x.grid(), "warm-start state");
  double J = objective(p, x, u);
  SweepResult out{Candidate{x, u, SampledFn::zeros(sys.grid, static_cast<Index>(sys.n_states())), 1.0}, {}, 0,
                  false};

  for (std::size_t it = 0;; ++it) {
    const LagrangianGradients lg = lagrangian_gradients(p, w, x, u);
    const SampledFn lambda = solve_discrete_adjoint(sys, x, u, w, lg.x, p.frozen);
    Eigen::MatrixXd G = hamiltonian_gradient_u(p, w, x, u, 1.0, lambda);
    const double res = sup_rows(G, rows);
    out.history.push_back({J, res});
    out.candidate = Candidate{x, u, lambda, 1.0};
    if (res <= opt.tol) {
      out.converged = true;
      break;
    }
    if (it == opt.max_iter) break;

    double s = opt.step;
    bool accepted = false;
    for (std::size_t hv = 0; hv <= opt.max_halvings && !accepted; ++hv, s *= 0.5) {
      SampledFn un(sys.grid, u.values() + s * G);
      try {
        SampledFn xn = solve_forward(sys, un).x;
        const double Jn = objective(p, xn, un);
        if (std::isfinite(Jn) && Jn >= J - 1e-12) {
          u = std::move(un);
          x = std::move(xn);
          J = Jn;
          accepted = true;
        }
      } catch (const NumericalError&) {
        // A trial step that breaks the forward solve counts as a rejection.
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << "sweep line search exhausted " << opt.max_halvings << " halvings at iteration " << it
         << " (opt_res = " << res << ")";
      throw NumericalError(os.str(), std::nullopt, it);
    }
    ++out.iterations;
  }
  return out;
}

}  // namespace akfrac

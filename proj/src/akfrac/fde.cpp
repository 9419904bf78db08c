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

#include "akfrac/fde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "akfrac/error.hpp"

namespace akfrac {

namespace {

double sup(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void check_inputs(const ControlSystem& sys, const SampledFn& x, const SampledFn& u) {
  require_same_grid(sys.grid, x.grid(), "state");
  require_same_grid(sys.grid, u.grid(), "control");
  if (static_cast<std::size_t>(x.cols()) != sys.n_states())
    throw ValidationError("state has " + std::to_string(x.cols()) + " columns, expected " +
                          std::to_string(sys.n_states()));
  if (static_cast<std::size_t>(u.cols()) != sys.n_controls)
    throw ValidationError("control has " + std::to_string(u.cols()) + " columns, expected " +
                          std::to_string(sys.n_controls));
}

Eigen::RowVectorXd eval_f(const ControlSystem& sys, double t, const Eigen::RowVectorXd& x,
                          const Eigen::Ref<const Eigen::RowVectorXd>& u) {
  const auto env = node_env(sys.dims(), t, x, u);
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(sys.n_states()));
  for (std::size_t i = 0; i < sys.n_states(); ++i) out(static_cast<Eigen::Index>(i)) = sys.f[i].eval(env);
  return out;
}

// Weight of node j in row k of the discrete right operator acting on lambda.
struct RightOperator {
  std::optional<OperatorPlan> plan;  // empty for alpha = 1
  double inv_a1 = 1.0;

  double operator()(std::size_t k, std::size_t j) const {
    if (plan) return plan->weight(k, j);
    return k == j ? inv_a1 : 0.0;
  }
};

RightOperator right_operator(const ControlSystem& sys) {
  RightOperator r;
  const AnalyticKernel& K = sys.kernel;
  if (K.alpha() >= 1.0) {
    r.inv_a1 = 1.0 / K(1.0);
    return r;
  }
  r.plan = build_plan(dual_kernel(K), sys.grid, Side::Right);
  return r;
}

std::vector<bool> free_mask(std::size_t n, const std::vector<std::optional<double>>& frozen) {
  if (!frozen.empty() && frozen.size() != n)
    throw ValidationError("frozen adjoint list must have one entry per state");
  std::vector<bool> mask(n, true);
  for (std::size_t i = 0; i < frozen.size(); ++i) mask[i] = !frozen[i].has_value();
  return mask;
}

std::vector<Eigen::MatrixXd> state_jacobians_t(const ControlSystem& sys, const SampledFn& x,
                                               const SampledFn& u) {
  std::vector<Eigen::MatrixXd> out(sys.grid.size());
  for (std::size_t k = 0; k < sys.grid.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out[k] = dynamics_jacobians(sys, sys.grid.t(k), x.values().row(i), u.values().row(i)).fx.transpose();
  }
  return out;
}

}  // namespace

ControlSystem make_control_system(const AnalyticKernel& kernel, const Grid& grid,
                                  const std::vector<std::string>& dynamics, Eigen::VectorXd x_a,
                                  std::size_t n_controls) {
  if (dynamics.empty()) throw ValidationError("dynamics need at least one state equation");
  if (static_cast<std::size_t>(x_a.size()) != dynamics.size())
    throw ValidationError("x0 has " + std::to_string(x_a.size()) + " entries for " +
                          std::to_string(dynamics.size()) + " states");
  if (!x_a.allFinite()) throw ValidationError("x0 must be finite");
  if (kernel.alpha() >= 1.0 && kernel.beta() != 0.0)
    throw ValidationError("alpha = 1 requires beta = 0");
  kernel.check_interval(grid.length());
  const Dims dims{dynamics.size(), n_controls, 0, 0};
  ControlSystem sys{kernel, grid, {}, std::move(x_a), n_controls};
  for (const auto& src : dynamics) sys.f.push_back(Expr::parse(src, dims));
  return sys;
}

std::vector<double> node_env(const Dims& dims, double t, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                             const Eigen::Ref<const Eigen::RowVectorXd>& u) {
  std::vector<double> env(dims.size(), 0.0);
  env[0] = t;
  for (std::size_t i = 0; i < dims.n && i < static_cast<std::size_t>(x.size()); ++i)
    env[dims.slot(VarKind::X, i)] = x(static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < dims.m && i < static_cast<std::size_t>(u.size()); ++i)
    env[dims.slot(VarKind::U, i)] = u(static_cast<Eigen::Index>(i));
  return env;
}

Eigen::MatrixXd eval_dynamics(const ControlSystem& sys, const SampledFn& x, const SampledFn& u) {
  check_inputs(sys, x, u);
  Eigen::MatrixXd out(x.values().rows(), x.cols());
  for (std::size_t k = 0; k < sys.grid.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    try {
      out.row(i) = eval_f(sys, sys.grid.t(k), x.values().row(i), u.values().row(i));
    } catch (const NumericalError& e) {
      throw NumericalError(e.what(), k);
    }
  }
  return out;
}

Jacobians dynamics_jacobians(const ControlSystem& sys, double t, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                             const Eigen::Ref<const Eigen::RowVectorXd>& u) {
  const Dims d = sys.dims();
  const auto env = node_env(d, t, x, u);
  std::vector<std::size_t> wrt;
  for (std::size_t i = 0; i < d.n; ++i) wrt.push_back(d.slot(VarKind::X, i));
  for (std::size_t i = 0; i < d.m; ++i) wrt.push_back(d.slot(VarKind::U, i));
  const auto n = static_cast<Eigen::Index>(d.n);
  const auto m = static_cast<Eigen::Index>(d.m);
  Jacobians J{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, m)};
  std::vector<double> g(wrt.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    sys.f[static_cast<std::size_t>(i)].gradient(env, wrt, g);
    for (Eigen::Index j = 0; j < n; ++j) J.fx(i, j) = g[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < m; ++j) J.fu(i, j) = g[static_cast<std::size_t>(n + j)];
  }
  return J;
}

ForwardResult solve_forward(const ControlSystem& sys, const SampledFn& u, double tol, std::size_t max_iter) {
  require_same_grid(sys.grid, u.grid(), "control");
  if (static_cast<std::size_t>(u.cols()) != sys.n_controls)
    throw ValidationError("control has " + std::to_string(u.cols()) + " columns, expected " +
                          std::to_string(sys.n_controls));
  const OperatorPlan W = build_plan(sys.kernel, sys.grid, Side::Left);
  const std::size_t N = sys.grid.size();
  const auto ns = static_cast<Eigen::Index>(sys.n_states());
  Eigen::MatrixXd X(static_cast<Eigen::Index>(N), ns), F(static_cast<Eigen::Index>(N), ns);
  const Eigen::RowVectorXd xa = sys.x_a.transpose();
  ForwardResult res{SampledFn::zeros(sys.grid, ns), 0.0, 0};

  for (std::size_t k = 0; k < N; ++k) {
    const auto ik = static_cast<Eigen::Index>(k);
    const double t = sys.grid.t(k);
    const auto uk = u.values().row(ik);
    try {
      Eigen::RowVectorXd s = xa;
      for (std::size_t j = 0; j < k; ++j) s += W.weight(k, j) * F.row(static_cast<Eigen::Index>(j));
      const double wkk = W.weight(k, k);
      Eigen::RowVectorXd x = k == 0 ? xa : Eigen::RowVectorXd(X.row(ik - 1));
      double prev = std::numeric_limits<double>::infinity();
      double damping = 1.0;
      std::size_t it = 0;
      for (;; ++it) {
        if (it == max_iter) {
          std::ostringstream os;
          os << "Picard iteration did not converge at node " << k << " (t = " << t << ")";
          throw NumericalError(os.str(), k, it);
        }
        const Eigen::RowVectorXd next = s + wkk * eval_f(sys, t, x, uk);
        const double step = (next - x).cwiseAbs().maxCoeff();
        if (!std::isfinite(step)) throw NumericalError("state blows up", k, it);
        if (step <= tol * (1.0 + next.cwiseAbs().maxCoeff())) {
          x = next;
          break;
        }
        if (step >= prev) damping = 0.5;
        x += damping * (next - x);
        prev = step;
      }
      res.max_inner_iter = std::max(res.max_inner_iter, it);
      X.row(ik) = x;
      F.row(ik) = eval_f(sys, t, x, uk);
    } catch (const NumericalError& e) {
      if (e.node()) throw;
      throw NumericalError(e.what(), k);
    }
  }
  res.x = SampledFn(sys.grid, X);
  res.residual = sup(X.rowwise() - xa - W.apply(F));
  return res;
}

double volterra_residual(const ControlSystem& sys, const SampledFn& x, const SampledFn& u) {
  const Eigen::MatrixXd F = eval_dynamics(sys, x, u);
  const OperatorPlan W = build_plan(sys.kernel, sys.grid, Side::Left);
  const Eigen::RowVectorXd xa = sys.x_a.transpose();
  return sup(x.values().rowwise() - xa - W.apply(F));
}

SampledFn solve_variational(const ControlSystem& sys, const SampledFn& x, const SampledFn& u,
                            const SampledFn& h) {
  check_inputs(sys, x, u);
  require_same_grid(sys.grid, h.grid(), "control variation");
  if (h.cols() != u.cols()) throw ValidationError("control variation has the wrong column count");
  const OperatorPlan W = build_plan(sys.kernel, sys.grid, Side::Left);
  const std::size_t N = sys.grid.size();
  const auto ns = static_cast<Eigen::Index>(sys.n_states());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(ns, ns);
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), ns);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), ns);
  for (std::size_t k = 0; k < N; ++k) {
    const auto ik = static_cast<Eigen::Index>(k);
    const Jacobians J = dynamics_jacobians(sys, sys.grid.t(k), x.values().row(ik), u.values().row(ik));
    const Eigen::VectorXd hk = h.values().row(ik).transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ns);
    for (std::size_t j = 0; j < k; ++j) rhs += W.weight(k, j) * G.row(static_cast<Eigen::Index>(j)).transpose();
    const double wkk = W.weight(k, k);
    rhs += wkk * (J.fu * hk);
    const Eigen::MatrixXd M = I - wkk * J.fx;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) throw NumericalError("variational step matrix is singular", k);
    const Eigen::VectorXd e = lu.solve(rhs);
    eta.row(ik) = e.transpose();
    G.row(ik) = (J.fx * e + J.fu * hk).transpose();
  }
  return SampledFn(sys.grid, eta);
}

AdjointResult solve_adjoint(const ControlSystem& sys, const SampledFn& x, const SampledFn& u,
                            const EndpointWeight& w, const Eigen::MatrixXd& source,
                            const std::vector<std::optional<double>>& frozen) {
  check_inputs(sys, x, u);
  require_same_grid(sys.grid, w.grid(), "weight");
  const std::size_t N = sys.grid.size();
  const std::size_t n = sys.grid.n();
  const auto ns = static_cast<Eigen::Index>(sys.n_states());
  if (source.rows() != static_cast<Eigen::Index>(N) || source.cols() != ns)
    throw ValidationError("adjoint source has the wrong shape");
  const auto mask = free_mask(sys.n_states(), frozen);
  std::vector<Eigen::Index> fi, ci;
  for (Eigen::Index i = 0; i < ns; ++i) (mask[static_cast<std::size_t>(i)] ? fi : ci).push_back(i);
  Eigen::VectorXd cval(static_cast<Eigen::Index>(ci.size()));
  for (std::size_t r = 0; r < ci.size(); ++r) cval(static_cast<Eigen::Index>(r)) = *frozen[static_cast<std::size_t>(ci[r])];

  const RightOperator WR = right_operator(sys);
  const Eigen::MatrixXd S = w.tail_integrals(source);
  const auto JT = state_jacobians_t(sys, x, u);
  const double h = sys.grid.h();

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), ns);
  for (std::size_t r = 0; r < ci.size(); ++r) L.col(ci[r]).setConstant(cval(static_cast<Eigen::Index>(r)));
  // Running sum of J_j^T lambda_j over k < j < n.
  Eigen::VectorXd inner = Eigen::VectorXd::Zero(ns);
  const Eigen::VectorXd end_term = JT[n] * L.row(static_cast<Eigen::Index>(n)).transpose();

  for (std::size_t kk = n; kk-- > 0;) {
    const auto ik = static_cast<Eigen::Index>(kk);
    if (kk + 1 < n) inner += JT[kk + 1] * L.row(ik + 1).transpose();
    Eigen::VectorXd known = Eigen::VectorXd::Zero(ns);
    for (std::size_t j = kk + 1; j <= n; ++j) {
      const double wkj = WR(kk, j);
      if (wkj != 0.0) known += wkj * L.row(static_cast<Eigen::Index>(j)).transpose();
    }
    known -= h * inner + 0.5 * h * end_term;
    const Eigen::VectorXd rhs_full = S.row(ik).transpose() - known;
    const double wkk = WR(kk, kk);
    const Eigen::MatrixXd A = wkk * Eigen::MatrixXd::Identity(ns, ns) - 0.5 * h * JT[kk];
    if (fi.empty()) continue;
    const auto nf = static_cast<Eigen::Index>(fi.size());
    Eigen::MatrixXd Aff(nf, nf);
    Eigen::VectorXd rhs(nf);
    for (Eigen::Index r = 0; r < nf; ++r) {
      rhs(r) = rhs_full(fi[static_cast<std::size_t>(r)]);
      for (Eigen::Index c = 0; c < nf; ++c) Aff(r, c) = A(fi[static_cast<std::size_t>(r)], fi[static_cast<std::size_t>(c)]);
      for (std::size_t c = 0; c < ci.size(); ++c)
        rhs(r) -= A(fi[static_cast<std::size_t>(r)], ci[c]) * cval(static_cast<Eigen::Index>(c));
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Aff);
    if (!lu.isInvertible()) throw NumericalError("adjoint step matrix is singular", kk);
    const Eigen::VectorXd lf = lu.solve(rhs);
    if (!lf.allFinite()) throw NumericalError("adjoint blows up", kk);
    for (Eigen::Index r = 0; r < nf; ++r) L(ik, fi[static_cast<std::size_t>(r)]) = lf(r);
  }

  AdjointResult res{SampledFn(sys.grid, L), 0.0, 0.0};
  std::tie(res.equation_residual, res.transversality) = adjoint_residual(sys, x, u, w, source, res.lambda, frozen);
  return res;
}

SampledFn solve_discrete_adjoint(const ControlSystem& sys, const SampledFn& x, const SampledFn& u,
                                 const EndpointWeight& w, const Eigen::MatrixXd& grad,
                                 const std::vector<std::optional<double>>& frozen) {
  check_inputs(sys, x, u);
  require_same_grid(sys.grid, w.grid(), "weight");
  const std::size_t n = sys.grid.n();
  const auto N = static_cast<Eigen::Index>(n + 1);
  const auto ns = static_cast<Eigen::Index>(sys.n_states());
  if (grad.rows() != N || grad.cols() != ns) throw ValidationError("adjoint source has the wrong shape");
  const auto mask = free_mask(sys.n_states(), frozen);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(ns);
  for (std::size_t i = 0; i < frozen.size(); ++i)
    if (frozen[i]) c(static_cast<Eigen::Index>(i)) = *frozen[i];

  const OperatorPlan W = build_plan(sys.kernel, sys.grid, Side::Left);
  const auto JT = state_jacobians_t(sys, x, u);
  const double h = sys.grid.h();
  const Eigen::VectorXd density = w.node_density();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(ns, ns);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N, ns);
  Eigen::MatrixXd L(N, ns);
  for (std::size_t k = n + 1; k-- > 0;) {
    const auto ik = static_cast<Eigen::Index>(k);
    const double tau = (k == 0 || k == n) ? 0.5 * h : h;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(ns);
    for (std::size_t i = k + 1; i <= n; ++i) r += W.weight(i, k) * P.row(static_cast<Eigen::Index>(i)).transpose();
    const double wkk = W.weight(k, k);
    const Eigen::VectorXd rhs = tau * density(ik) * grad.row(ik).transpose() + JT[k] * (tau * c + r);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(I - wkk * JT[k]);
    if (!lu.isInvertible()) throw NumericalError("discrete adjoint step matrix is singular", k);
    const Eigen::VectorXd p = lu.solve(rhs);
    if (!p.allFinite()) throw NumericalError("discrete adjoint blows up", k);
    P.row(ik) = p.transpose();
    const Eigen::VectorXd lam = (wkk * p + r) / tau;
    for (Eigen::Index i = 0; i < ns; ++i) L(ik, i) = mask[static_cast<std::size_t>(i)] ? lam(i) : c(i);
  }
  return SampledFn(sys.grid, L);
}

std::pair<double, double> adjoint_residual(const ControlSystem& sys, const SampledFn& x, const SampledFn& u,
                                           const EndpointWeight& w, const Eigen::MatrixXd& source,
                                           const SampledFn& lambda,
                                           const std::vector<std::optional<double>>& frozen) {
  check_inputs(sys, x, u);
  require_same_grid(sys.grid, lambda.grid(), "adjoint");
  const std::size_t N = sys.grid.size();
  const std::size_t n = sys.grid.n();
  const auto ns = static_cast<Eigen::Index>(sys.n_states());
  if (lambda.cols() != ns) throw ValidationError("adjoint has the wrong column count");
  const auto mask = free_mask(sys.n_states(), frozen);
  const RightOperator WR = right_operator(sys);
  const Eigen::MatrixXd S = w.tail_integrals(source);
  const auto JT = state_jacobians_t(sys, x, u);
  const Eigen::MatrixXd& L = lambda.values();
  const double h = sys.grid.h();

  Eigen::MatrixXd P(static_cast<Eigen::Index>(N), ns);
  for (std::size_t k = 0; k < N; ++k)
    P.row(static_cast<Eigen::Index>(k)) = (JT[k] * L.row(static_cast<Eigen::Index>(k)).transpose()).transpose();
  // T_k = int_{t_k}^b J^T lambda by the trapezoid rule.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), ns);
  for (std::size_t k = n; k-- > 0;) {
    const auto ik = static_cast<Eigen::Index>(k);
    T.row(ik) = T.row(ik + 1) + 0.5 * h * (P.row(ik) + P.row(ik + 1));
  }
  double eq = 0.0, trans = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(ns);
    for (std::size_t j = k; j < N; ++j) {
      const double wkj = WR(k, j);
      if (wkj != 0.0) g += wkj * L.row(static_cast<Eigen::Index>(j));
    }
    if (k == n) {
      for (Eigen::Index i = 0; i < ns; ++i)
        if (mask[static_cast<std::size_t>(i)]) trans = std::max(trans, std::fabs(g(i)));
      continue;
    }
    const auto ik = static_cast<Eigen::Index>(k);
    const Eigen::RowVectorXd r = g - T.row(ik) - S.row(ik);
    for (Eigen::Index i = 0; i < ns; ++i)
      if (mask[static_cast<std::size_t>(i)]) eq = std::max(eq, std::fabs(r(i)));
  }
  return {eq, trans};
}

}  // namespace akfrac

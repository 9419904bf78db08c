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

#include "akfrac/variational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "akfrac/error.hpp"
#include "akfrac/fracops.hpp"
#include "akfrac/weight.hpp"

namespace akfrac {

namespace {

using Index = Eigen::Index;

// Gradients of an expression over (t, x, v) at every node.
struct XVGradients {
  Eigen::MatrixXd x, v;
};

XVGradients xv_gradients(const Expr& e, const CoVProblem& p, const SampledFn& x, const SampledFn& v) {
  const Dims d = p.dims();
  const auto n = static_cast<Index>(d.n);
  const auto N = static_cast<Index>(p.grid.size());
  std::vector<std::size_t> wrt;
  for (std::size_t i = 0; i < d.n; ++i) wrt.push_back(d.slot(VarKind::X, i));
  for (std::size_t i = 0; i < d.v; ++i) wrt.push_back(d.slot(VarKind::V, i));
  XVGradients out{Eigen::MatrixXd(N, n), Eigen::MatrixXd(N, n)};
  std::vector<double> env(d.size()), g(wrt.size());
  for (Index k = 0; k < N; ++k) {
    env[0] = p.grid.t(static_cast<std::size_t>(k));
    for (Index i = 0; i < n; ++i) {
      env[d.slot(VarKind::X, static_cast<std::size_t>(i))] = x(static_cast<std::size_t>(k), i);
      env[d.slot(VarKind::V, static_cast<std::size_t>(i))] = v(static_cast<std::size_t>(k), i);
    }
    try {
      e.gradient(env, wrt, g);
    } catch (const NumericalError& err) {
      throw NumericalError(err.what(), static_cast<std::size_t>(k));
    }
    for (Index i = 0; i < n; ++i) {
      out.x(k, i) = g[static_cast<std::size_t>(i)];
      out.v(k, i) = g[static_cast<std::size_t>(n + i)];
    }
  }
  return out;
}

// Rows where the residual has a pointwise meaning.
std::size_t residual_rows(const AnalyticKernel& K, const Grid& g) { return K.alpha() < 1.0 ? g.n() : g.size(); }

void check_shape(const CoVProblem& p, const SampledFn& x) {
  require_same_grid(p.grid, x.grid(), "curve");
  if (static_cast<std::size_t>(x.cols()) != p.n()) throw ValidationError("curve has the wrong column count");
}

void add_weighted(Eigen::MatrixXd& R, const EndpointWeight& w, const Eigen::MatrixXd& phi, double factor) {
  const std::size_t rows = residual_rows(w.kernel(), w.grid());
  for (std::size_t k = 0; k < rows; ++k)
    R.row(static_cast<Index>(k)) += factor * w(w.grid().t(k)) * phi.row(static_cast<Index>(k));
}

void clear_endpoint(Eigen::MatrixXd& R, const CoVProblem& p) {
  if (residual_rows(p.kernel, p.grid) < p.grid.size()) R.row(R.rows() - 1).setZero();
}

std::vector<std::string> control_dynamics(std::size_t n) {
  std::vector<std::string> f;
  for (std::size_t i = 1; i <= n; ++i) f.push_back("u" + std::to_string(i));
  return f;
}

}  // namespace

CoVProblem make_cov_problem(const AnalyticKernel& kernel, const Grid& grid, const std::string& lagrangian,
                            Eigen::VectorXd x_a, Eigen::VectorXd x_b) {
  if (x_a.size() == 0) throw ValidationError("boundary value x_a is empty");
  if (x_a.size() != x_b.size()) throw ValidationError("boundary values x_a and x_b differ in length");
  if (!x_a.allFinite() || !x_b.allFinite()) throw ValidationError("boundary values must be finite");
  if (kernel.alpha() >= 1.0 && kernel.beta() != 0.0) throw ValidationError("alpha = 1 requires beta = 0");
  kernel.check_interval(grid.length());
  const Dims d{static_cast<std::size_t>(x_a.size()), 0, 0, static_cast<std::size_t>(x_a.size())};
  return CoVProblem{kernel, grid, Expr::parse(lagrangian, d), std::move(x_a), std::move(x_b)};
}

SampledFn el_residual(const CoVProblem& p, const SampledFn& x) {
  check_shape(p, x);
  const auto last = static_cast<Index>(p.grid.n());
  const double ta = 1e-12 * (1.0 + p.x_a.cwiseAbs().maxCoeff());
  const double tb = 1e-12 * (1.0 + p.x_b.cwiseAbs().maxCoeff());
  if ((x.values().row(0).transpose() - p.x_a).cwiseAbs().maxCoeff() > ta)
    throw ValidationError("curve does not match x(a) = x_a");
  if ((x.values().row(last).transpose() - p.x_b).cwiseAbs().maxCoeff() > tb)
    throw ValidationError("curve does not match x(b) = x_b");
  const SampledFn v = caputo_derivative(p.kernel, p.grid, Side::Left, x);
  const XVGradients g = xv_gradients(p.L, p, x, v);
  const EndpointWeight w(p.kernel, p.grid);
  Eigen::MatrixXd R = rl_right_weighted(w, g.v);
  add_weighted(R, w, g.x, 1.0);
  clear_endpoint(R, p);
  return SampledFn(p.grid, R);
}

OCProblem cov_as_ocp(const CoVProblem& p) {
  ControlSystem sys = make_control_system(p.kernel, p.grid, control_dynamics(p.n()), p.x_a, p.n());
  Expr L = p.L.remap(sys.dims(), VarKind::V, VarKind::U);
  return OCProblem{std::move(sys), std::move(L), Eigen::VectorXd(), {}};
}

SampledFn pmp_reduction_residual(const CoVProblem& p, const SampledFn& x) {
  check_shape(p, x);
  const OCProblem op = cov_as_ocp(p);
  const SampledFn u = caputo_derivative(p.kernel, p.grid, Side::Left, x);
  const EndpointWeight w(p.kernel, p.grid);
  const LagrangianGradients lg = lagrangian_gradients(op, w, x, u);
  // lambda / w = -grad_u L; RL_right lambda - grad_x H, with grad_x H = w grad_x L.
  Eigen::MatrixXd R = rl_right_weighted(w, -lg.u);
  add_weighted(R, w, lg.x, -1.0);
  clear_endpoint(R, p);
  return SampledFn(p.grid, -R);
}

SampledFn augmented_el_residual(const CoVProblem& p, const Expr& y, double lambda, const SampledFn& x) {
  check_shape(p, x);
  const SampledFn v = caputo_derivative(p.kernel, p.grid, Side::Left, x);
  const XVGradients gl = xv_gradients(p.L, p, x, v);
  const XVGradients gy = xv_gradients(y, p, x, v);
  const EndpointWeight w(p.kernel, p.grid);
  Eigen::MatrixXd R = rl_right_weighted(w, gl.v);
  if (lambda != 0.0) {
    R += lambda * rl_derivative(p.kernel, p.grid, Side::Right, SampledFn(p.grid, gy.v)).values();
    R += lambda * gy.x;
  }
  add_weighted(R, w, gl.x, 1.0);
  clear_endpoint(R, p);
  return SampledFn(p.grid, R);
}

IsoProblem make_iso_problem(CoVProblem base, const std::string& constraint, double l) {
  if (!std::isfinite(l)) throw ValidationError("constraint value l must be finite");
  Expr y = Expr::parse(constraint, base.dims());
  return IsoProblem{std::move(base), std::move(y), l};
}

IsoResult solve_isoperimetric(const IsoProblem& p, std::pair<double, double> bracket, const IsoOptions& opt) {
  const CoVProblem& base = p.base;
  const std::size_t n = base.n();
  const auto ni = static_cast<Index>(n);
  if (!(opt.tol > 0.0)) throw ValidationError("isoperimetric tolerance must be positive");
  if (!(bracket.first < bracket.second)) throw ValidationError("multiplier bracket must satisfy lo < hi");

  // States (x, z), controls u; z carries the constraint integrand.
  Eigen::VectorXd xa(ni + 1);
  xa << base.x_a, 0.0;
  auto dyn = control_dynamics(n);
  dyn.push_back("0");
  ControlSystem sys = make_control_system(base.kernel, base.grid, dyn, xa, n);
  const Dims d = sys.dims();
  sys.f[n] = p.y.remap(d, VarKind::V, VarKind::U);
  OCProblem aug{std::move(sys), base.L.remap(d, VarKind::V, VarKind::U), Eigen::VectorXd::Zero(ni + 1),
                std::vector<std::optional<double>>(n + 1)};
  const auto last = static_cast<Index>(base.grid.n());

  SampledFn u_warm = SampledFn::zeros(base.grid, ni);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(ni);

  struct Inner {
    SweepResult sweep;
    Eigen::VectorXd nu;
    double defect;
    double boundary;
  };

  auto sweep = [&](const Eigen::VectorXd& nu_x) {
    aug.terminal.head(ni) = nu_x;
    SweepResult r = solve_ocp(aug, u_warm, opt.sweep);
    if (!r.converged)
      throw NumericalError("inner sweep did not converge within " + std::to_string(opt.sweep.max_iter) +
                           " iterations");
    u_warm = r.candidate.u;
    return r;
  };
  auto end_state = [&](const SweepResult& r) {
    return Eigen::VectorXd(r.candidate.x.values().row(last).head(ni).transpose());
  };

  auto inner = [&](double lambda) {
    aug.frozen[n] = lambda;
    SweepResult r = sweep(nu);
    Eigen::VectorXd g = end_state(r) - base.x_b;
    for (std::size_t it = 0; g.cwiseAbs().maxCoeff() > opt.tol; ++it) {
      if (it == opt.max_newton)
        throw NumericalError("terminal multiplier Newton did not converge (|x(b) - x_b| = " +
                             std::to_string(g.cwiseAbs().maxCoeff()) + ")");
      Eigen::MatrixXd Jm(ni, ni);
      for (Index i = 0; i < ni; ++i) {
        Eigen::VectorXd np = nu;
        const double delta = 1e-3 * (1.0 + std::fabs(nu(i)));
        np(i) += delta;
        Jm.col(i) = (end_state(sweep(np)) - base.x_b - g) / delta;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Jm);
      if (!lu.isInvertible()) throw NumericalError("terminal multiplier Jacobian is singular");
      nu -= lu.solve(g);
      r = sweep(nu);
      g = end_state(r) - base.x_b;
    }
    const double zb = r.candidate.x(static_cast<std::size_t>(last), ni);
    return Inner{std::move(r), nu, zb - p.l, g.cwiseAbs().maxCoeff()};
  };

  double lo = bracket.first, hi = bracket.second;
  Inner ilo = inner(lo);
  Inner ihi = inner(hi);
  double dlo = ilo.defect, dhi = ihi.defect;
  std::optional<Inner> best;
  double lam = 0.0;
  std::size_t outer = 0;
  if (std::fabs(dlo) <= opt.tol) {
    best = std::move(ilo), lam = lo;
  } else if (std::fabs(dhi) <= opt.tol) {
    best = std::move(ihi), lam = hi;
  } else if ((dlo < 0.0) == (dhi < 0.0)) {
    std::ostringstream os;
    os << "multiplier bracket [" << lo << ", " << hi << "] does not straddle the constraint (defects " << dlo
       << ", " << dhi << ")";
    throw ValidationError(os.str());
  }
  // Illinois false position.
  int side = 0;
  while (!best) {
    if (outer == opt.max_outer)
      throw NumericalError("isoperimetric shooting did not converge", std::nullopt, outer);
    ++outer;
    const double c = (lo * dhi - hi * dlo) / (dhi - dlo);
    Inner ic = inner(c);
    const double dc = ic.defect;
    if (std::fabs(dc) <= opt.tol) {
      best = std::move(ic), lam = c;
      break;
    }
    if ((dc < 0.0) == (dhi < 0.0)) {
      hi = c, dhi = dc;
      if (side == 1) dlo *= 0.5;
      side = 1;
    } else {
      lo = c, dlo = dc;
      if (side == -1) dhi *= 0.5;
      side = -1;
    }
  }

  const Candidate& cand = best->sweep.candidate;
  IsoResult res{SampledFn(base.grid, cand.x.values().leftCols(ni)), cand.u, lam, best->defect, best->boundary,
                best->sweep.history.back().opt_res, 0.0, 0.0, false, best->nu, outer};
  // The augmented residual needs the curve to carry its boundary values exactly.
  Eigen::MatrixXd xc = res.x.values();
  xc.row(last) = base.x_b.transpose();
  const SampledFn aug_res = augmented_el_residual(base, p.y, lam, SampledFn(base.grid, xc));
  // The discrete optimum has O(h) control errors at t_0 and t_n; the two
  // nested difference stencils turn them into O(1) residuals in the first and
  // last three rows, so those rows are left out.
  constexpr Index layer = 3;
  if (last > 2 * layer)
    res.el_res = aug_res.values().middleRows(layer, last - 2 * layer + 1).cwiseAbs().maxCoeff();
  if (base.kernel.alpha() < 1.0) {
    const SampledFn c = SampledFn(base.grid, Eigen::VectorXd::Constant(last + 1, lam));
    res.lambda_rl_res = rl_derivative(base.kernel, base.grid, Side::Right, c).values().topRows(last).cwiseAbs().maxCoeff();
  }
  const double scale = std::max({1.0, std::fabs(bracket.first), std::fabs(bracket.second)});
  res.degenerate = std::fabs(lam) <= 1e-6 * scale;
  return res;
}

}  // namespace akfrac

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

#include "akfrac/fracops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "akfrac/error.hpp"

namespace akfrac {

namespace {

using Index = Eigen::Index;

// r0^p expm1(p log1p(h / r0)) = (r0 + h)^p - r0^p without cancellation.
double power_increment(double p, double r0, double h) {
  return std::pow(r0, p) * std::expm1(p * std::log1p(h / r0));
}

void require_scalar(const SampledFn& f, const char* what) {
  if (f.cols() != 1) throw ValidationError(std::string(what) + " must be scalar");
}

}  // namespace

CellWeights power_cell_weights(double mu, double r0, double h) {
  if (r0 == 0.0) {
    const double hm = std::pow(h, mu);
    return {hm / (mu * (mu + 1.0)), hm / (mu + 1.0)};
  }
  const double p = mu - 1.0;
  if (r0 >= 8.0 * h && mu < 8.0) {
    // Binomial expansion of (1 + x tau)^p with x = h / r0 <= 1/8.
    const double x = h / r0;
    double c = 1.0, xm = 1.0, near = 0.0, far = 0.0;
    for (int m = 0; m < 100; ++m) {
      const double term = c * xm;
      near += term / ((m + 1.0) * (m + 2.0));
      far += term / (m + 2.0);
      if (std::fabs(term) < 1e-18 * std::fabs(far) && m > 2) break;
      c *= (p - m) / (m + 1.0);
      xm *= x;
    }
    const double scale = std::pow(r0, p) * h;
    return {scale * near, scale * far};
  }
  const double r1 = r0 + h;
  const double i0 = power_increment(mu, r0, h) / mu;
  const double i1 = power_increment(mu + 1.0, r0, h) / (mu + 1.0);
  return {(r1 * i0 - i1) / h, (i1 - r0 * i0) / h};
}

OperatorPlan::OperatorPlan(AnalyticKernel kernel, Grid grid, Side side, double order,
                           std::size_t truncation)
    : kernel_(std::move(kernel)), grid_(grid), side_(side), order_(order), truncation_(truncation) {}

double OperatorPlan::left_weight(std::size_t k, std::size_t j) const noexcept {
  if (k == 0 || j > k) return 0.0;
  if (j == k) return diag_;
  if (j == 0) return first_[k];
  return lag_[k - j];
}

double OperatorPlan::weight(std::size_t k, std::size_t j) const noexcept {
  const std::size_t n = grid_.n();
  if (side_ == Side::Left) return left_weight(k, j);
  return left_weight(n - k, n - j);
}

Eigen::MatrixXd OperatorPlan::dense() const {
  const Index m = static_cast<Index>(grid_.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  for (Index k = 0; k < m; ++k)
    for (Index j = 0; j < m; ++j)
      w(k, j) = weight(static_cast<std::size_t>(k), static_cast<std::size_t>(j));
  return w;
}

Eigen::MatrixXd OperatorPlan::apply_left(const Eigen::MatrixXd& x) const {
  const Index n = static_cast<Index>(grid_.n());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    const double* xv = x.col(c).data();
    double* ov = out.col(c).data();
    for (Index k = 1; k <= n; ++k) {
      double s = diag_ * xv[k] + first_[static_cast<std::size_t>(k)] * xv[0];
      for (Index j = 1; j < k; ++j) s += lag_[static_cast<std::size_t>(k - j)] * xv[j];
      ov[k] = s;
    }
  }
  return out;
}

Eigen::MatrixXd OperatorPlan::apply(const Eigen::MatrixXd& x) const {
  if (x.rows() != static_cast<Index>(grid_.size()))
    throw ValidationError("plan apply: sample count does not match the plan's grid");
  if (side_ == Side::Left) return apply_left(x);
  return reflect(apply_left(reflect(x)));
}

SampledFn OperatorPlan::apply(const SampledFn& x) const {
  require_same_grid(grid_, x.grid(), "plan apply");
  Eigen::MatrixXd out = apply(x.values());
  if (!out.allFinite()) throw NumericalError("plan apply produced non-finite values");
  return SampledFn(grid_, std::move(out));
}

OperatorPlan build_plan(const AnalyticKernel& kernel, const Grid& grid, Side side, double order,
                        std::optional<std::size_t> n_trunc) {
  if (!(order > 0.0) || !std::isfinite(order))
    throw ValidationError("operator order must be positive and finite");
  kernel.check_interval(grid.length());
  const std::size_t last = kernel.size() - 1;
  const std::size_t requested = n_trunc.value_or(last);
  if (requested > kernel.size()) {
    std::ostringstream os;
    os << "truncation " << requested << " exceeds the kernel length " << kernel.size();
    throw ValidationError(os.str());
  }
  const std::size_t trunc = std::min(requested, last);

  OperatorPlan plan(kernel, grid, side, order, trunc);
  const std::size_t n = grid.n();
  const double h = grid.h();
  plan.lag_.assign(n + 1, 0.0);
  plan.first_.assign(n + 1, 0.0);
  std::vector<CellWeights> cw(n);
  for (std::size_t m = 0; m <= trunc; ++m) {
    const double am = kernel.coeff(m);
    if (am == 0.0) continue;
    const double mu = order + static_cast<double>(m) * kernel.beta();
    for (std::size_t d = 0; d < n; ++d) cw[d] = power_cell_weights(mu, static_cast<double>(d) * h, h);
    plan.diag_ += am * cw[0].near;
    for (std::size_t d = 1; d < n; ++d) plan.lag_[d] += am * (cw[d].near + cw[d - 1].far);
    for (std::size_t k = 1; k <= n; ++k) plan.first_[k] += am * cw[k - 1].far;
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::isfinite(plan.diag_) || !std::all_of(plan.lag_.begin(), plan.lag_.end(), finite) ||
      !std::all_of(plan.first_.begin(), plan.first_.end(), finite))
    throw NumericalError("plan weights overflow; reduce the truncation order");
  plan.tail_estimate_ = series_tail_bound(kernel, trunc, grid.length(), order);
  return plan;
}

OperatorPlan build_plan(const AnalyticKernel& kernel, const Grid& grid, Side side) {
  return build_plan(kernel, grid, side, kernel.alpha());
}

Eigen::MatrixXd reflect(const Eigen::MatrixXd& x) { return x.colwise().reverse(); }

SampledFn direct_integral(const AnalyticKernel& kernel, const Grid& grid, Side side, double order,
                          const SampledFn& x) {
  require_same_grid(grid, x.grid(), "direct_integral");
  if (!(order > 0.0)) throw ValidationError("operator order must be positive");
  kernel.check_interval(grid.length());
  const std::size_t n = grid.n();
  const double h = grid.h();
  const double beta = kernel.beta();
  auto rho = [&](double r) { return std::pow(r, order - 1.0) * kernel(std::pow(r, beta)); };

  // Moments of the full kernel weight against the two hat halves of the cell
  // r in [m h, (m + 1) h]; m0 pairs with the node nearer the evaluation point.
  std::vector<double> m0(n), m1(n);
  boost::math::quadrature::tanh_sinh<double> ts;
  m0[0] = h * ts.integrate([&](double tau) { return rho(h * tau) * (1.0 - tau); }, 0.0, 1.0);
  m1[0] = h * ts.integrate([&](double tau) { return rho(h * tau) * tau; }, 0.0, 1.0);
  using gl = boost::math::quadrature::gauss<double, 20>;
  for (std::size_t m = 1; m < n; ++m) {
    const double r0 = static_cast<double>(m) * h;
    m0[m] = h * gl::integrate([&](double tau) { return rho(r0 + h * tau) * (1.0 - tau); }, 0.0, 1.0);
    m1[m] = h * gl::integrate([&](double tau) { return rho(r0 + h * tau) * tau; }, 0.0, 1.0);
  }

  const Eigen::MatrixXd xin = side == Side::Left ? x.values() : reflect(x.values());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(xin.rows(), xin.cols());
  for (Index c = 0; c < xin.cols(); ++c) {
    for (std::size_t k = 1; k <= n; ++k) {
      double s = 0.0;
      for (std::size_t cell = 0; cell < k; ++cell) {
        const std::size_t m = k - 1 - cell;
        s += m0[m] * xin(static_cast<Index>(cell + 1), c) + m1[m] * xin(static_cast<Index>(cell), c);
      }
      out(static_cast<Index>(k), c) = s;
    }
  }
  if (side == Side::Right) out = reflect(out);
  return SampledFn(grid, std::move(out));
}

namespace {

double classical_scale(const AnalyticKernel& kernel) {
  if (kernel.beta() != 0.0)
    throw ValidationError("alpha = 1 is supported only with beta = 0 (classical limit)");
  const double a1 = kernel(1.0);
  if (a1 == 0.0) throw ValidationError("classical limit needs A(1) != 0");
  return a1;
}

}  // namespace

SampledFn caputo_derivative(const AnalyticKernel& kernel, const Grid& grid, Side side,
                            const SampledFn& x, const std::optional<SampledFn>& x_deriv) {
  require_same_grid(grid, x.grid(), "caputo_derivative");
  const SampledFn xd = x_deriv ? *x_deriv : fd_derivative(x);
  require_same_grid(grid, xd.grid(), "caputo_derivative");
  const double sign = side == Side::Left ? 1.0 : -1.0;
  if (kernel.alpha() >= 1.0) {
    const double a1 = classical_scale(kernel);
    return SampledFn(grid, xd.values() * (sign / a1));
  }
  const AnalyticKernel bar = dual_kernel(kernel);
  const OperatorPlan plan = build_plan(bar, grid, side, 1.0 - kernel.alpha());
  return SampledFn(grid, plan.apply(xd.values()) * sign);
}

SampledFn rl_derivative(const AnalyticKernel& kernel, const Grid& grid, Side side,
                        const SampledFn& x) {
  require_same_grid(grid, x.grid(), "rl_derivative");
  const double sign = side == Side::Left ? 1.0 : -1.0;
  if (kernel.alpha() >= 1.0) {
    const double a1 = classical_scale(kernel);
    return SampledFn(grid, fd_derivative(grid, x.values()) * (sign / a1));
  }
  const AnalyticKernel bar = dual_kernel(kernel);
  const OperatorPlan plan = build_plan(bar, grid, side, 1.0 - kernel.alpha());
  return SampledFn(grid, fd_derivative(grid, plan.apply(x.values())) * sign);
}

double duality_residual(const AnalyticKernel& kernel, const Grid& grid, double order,
                        const SampledFn& x, const SampledFn& y) {
  require_same_grid(grid, x.grid(), "duality_residual");
  require_same_grid(grid, y.grid(), "duality_residual");
  require_scalar(x, "duality_residual x");
  require_scalar(y, "duality_residual y");
  const OperatorPlan left = build_plan(kernel, grid, Side::Left, order);
  const OperatorPlan right = build_plan(kernel, grid, Side::Right, order);
  const Eigen::VectorXd ly = left.apply(y.values()).col(0);
  const Eigen::VectorXd rx = right.apply(x.values()).col(0);
  const double lhs = trapezoid(grid, x.column().cwiseProduct(ly));
  const double rhs = trapezoid(grid, y.column().cwiseProduct(rx));
  return std::fabs(lhs - rhs);
}

double ibp_residual(const AnalyticKernel& kernel, const Grid& grid, const SampledFn& x,
                    const SampledFn& y, const std::optional<SampledFn>& y_deriv) {
  require_same_grid(grid, x.grid(), "ibp_residual");
  require_same_grid(grid, y.grid(), "ibp_residual");
  require_scalar(x, "ibp_residual x");
  require_scalar(y, "ibp_residual y");
  if (!(kernel.alpha() < 1.0)) throw ValidationError("integration by parts needs alpha < 1");
  const Eigen::VectorXd cy = caputo_derivative(kernel, grid, Side::Left, y, y_deriv).column();
  const double lhs = trapezoid(grid, x.column().cwiseProduct(cy));

  const AnalyticKernel bar = dual_kernel(kernel);
  const OperatorPlan right = build_plan(bar, grid, Side::Right, 1.0 - kernel.alpha());
  const Eigen::VectorXd f = right.apply(x.values()).col(0);
  const Index n = static_cast<Index>(grid.n());
  const Eigen::VectorXd yv = y.column();
  const double boundary = yv(n) * f(n) - yv(0) * f(0);
  // int y (-F') dt, cell by cell.
  double tail = 0.0;
  for (Index j = 0; j < n; ++j) tail -= (f(j + 1) - f(j)) * 0.5 * (yv(j) + yv(j + 1));
  return std::fabs(lhs - boundary - tail);
}

GronwallResult gronwall_bound(const AnalyticKernel& kernel, const Grid& grid, const SampledFn& a,
                              const SampledFn& g, std::size_t k_max, GronwallFamily family) {
  require_same_grid(grid, a.grid(), "gronwall_bound");
  require_same_grid(grid, g.grid(), "gronwall_bound");
  require_scalar(a, "gronwall a");
  require_scalar(g, "gronwall g");
  const Eigen::VectorXd av = a.column();
  const Eigen::VectorXd gv = g.column();
  if (av.minCoeff() < 0.0) throw ValidationError("gronwall: a must be non-negative");
  if (gv.minCoeff() < 0.0) throw ValidationError("gronwall: g must be non-negative");
  for (Index j = 1; j < gv.size(); ++j) {
    if (gv(j) < gv(j - 1)) {
      std::ostringstream os;
      os << "gronwall: g must be non-decreasing, fails at node " << j;
      throw ValidationError(os.str());
    }
  }
  const double alpha = kernel.alpha();
  const double beta = kernel.beta();
  const double T = grid.length();
  const double big_m = gv.maxCoeff();
  const double q = big_m * std::pow(T, alpha);
  if (!(q < 1.0)) {
    std::ostringstream os;
    os << "gronwall: max g = " << big_m << " violates max g < 1/T^alpha = " << 1.0 / std::pow(T, alpha);
    throw ValidationError(os.str());
  }

  const CoefficientFamily fam =
      family == GronwallFamily::Fixed ? fixed_family(kernel) : gamma_family(kernel);
  auto coeff_mass = [&](const AnalyticKernel& k) {
    double s = 0.0;
    for (std::size_t m = 0; m < k.size(); ++m)
      s += std::fabs(k.coeff(m)) * std::pow(T, static_cast<double>(m) * beta);
    return s;
  };

  Eigen::VectorXd bound = av;
  Eigen::VectorXd gk = Eigen::VectorXd::Ones(gv.size());
  std::size_t terms = 0;
  double mu = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double order = static_cast<double>(k) * alpha;
    const AnalyticKernel member = family_member(fam, kernel.size(), order, beta, kernel.radius());
    mu = std::max(mu, coeff_mass(member));
    const OperatorPlan plan = build_plan(member, grid, Side::Left, order);
    gk = gk.cwiseProduct(gv);
    const Eigen::VectorXd term = gk.cwiseProduct(plan.apply(a.values()).col(0));
    if (!term.allFinite()) throw NumericalError("gronwall term overflows", std::nullopt, k);
    bound += term;
    terms = k;
    if (term.lpNorm<Eigen::Infinity>() < 1e-14) break;
  }
  const AnalyticKernel next =
      family_member(fam, kernel.size(), static_cast<double>(terms + 1) * alpha, beta, kernel.radius());
  mu = std::max(mu, coeff_mass(next));

  GronwallResult res{SampledFn(grid, bound), terms, 0.0, {}, false};
  res.tail_estimate = mu / T * std::pow(q, static_cast<double>(terms + 1)) / (1.0 - q) *
                      trapezoid(grid, av.cwiseAbs());
  try {
    res.semigroup = semigroup_check(fam, alpha, alpha, beta, std::min<std::size_t>(kernel.size() - 1, 8),
                                    1e-10);
    res.semigroup_warning = !res.semigroup.passed;
  } catch (const NumericalError&) {
    res.semigroup_warning = true;
  }
  return res;
}

bool verify_gronwall(const SampledFn& u, const SampledFn& bound, double tol) {
  require_same_grid(u.grid(), bound.grid(), "verify_gronwall");
  return ((u.values() - bound.values()).array() <= tol).all();
}

}  // namespace akfrac

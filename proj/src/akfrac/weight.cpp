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

#include "akfrac/weight.hpp"

#include <array>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "akfrac/error.hpp"
#include "akfrac/fracops.hpp"
#include "akfrac/special.hpp"

namespace akfrac {

namespace {

using Index = Eigen::Index;

constexpr int kGauss = 20;

// Gauss-Legendre nodes and weights mapped to [0, 1].
struct UnitRule {
  std::array<double, kGauss> x{}, w{};
  UnitRule() {
    using gl = boost::math::quadrature::gauss<double, kGauss>;
    const auto& ab = gl::abscissa();
    const auto& wt = gl::weights();
    int i = 0;
    for (std::size_t j = 0; j < ab.size(); ++j) {
      x[i] = 0.5 * (1.0 - ab[j]);
      w[i++] = 0.5 * wt[j];
      x[i] = 0.5 * (1.0 + ab[j]);
      w[i++] = 0.5 * wt[j];
    }
  }
};

const UnitRule& unit_rule() {
  static const UnitRule rule;
  return rule;
}

}  // namespace

EndpointWeight::EndpointWeight(const AnalyticKernel& kernel, const Grid& grid)
    : kernel_(kernel), grid_(grid) {
  kernel.check_interval(grid.length());
  const double a1 = kernel(1.0);
  if (a1 == 0.0) throw ValidationError("weight w needs A(1) != 0");
  if (kernel.alpha() >= 1.0 && kernel.beta() != 0.0)
    throw ValidationError("alpha = 1 is supported only with beta = 0 (classical limit)");
  scale_ = gamma_fn(kernel.alpha()) * a1;

  const std::size_t n = grid.n();
  const double h = grid.h();
  wl_.assign(n, 0.0);
  wr_.assign(n, 0.0);
  for (std::size_t m = 0; m < kernel.size(); ++m) {
    const double am = kernel.coeff(m);
    if (am == 0.0) continue;
    const double mu = kernel.alpha() + static_cast<double>(m) * kernel.beta();
    for (std::size_t c = 0; c < n; ++c) {
      // r = b - s; cell c spans r in [(n-c-1) h, (n-c) h] and node c+1 sits at the near end.
      const CellWeights cw = power_cell_weights(mu, static_cast<double>(n - c - 1) * h, h);
      wr_[c] += am * cw.near / scale_;
      wl_[c] += am * cw.far / scale_;
    }
  }
}

double EndpointWeight::operator()(double t) const {
  const double r = grid_.b() - t;
  if (singular() && !(r > 0.0)) throw NumericalError("w is singular at t = b for alpha < 1");
  if (!singular()) return kernel_(1.0) / scale_;
  return std::pow(r, kernel_.alpha() - 1.0) * kernel_(std::pow(r, kernel_.beta())) / scale_;
}

Eigen::VectorXd EndpointWeight::node_density() const {
  const std::size_t n = grid_.n();
  const double h = grid_.h();
  Eigen::VectorXd d(static_cast<Index>(n + 1));
  for (std::size_t k = 0; k <= n; ++k) {
    const double omega = (k < n ? wl_[k] : 0.0) + (k > 0 ? wr_[k - 1] : 0.0);
    const double tau = (k == 0 || k == n) ? 0.5 * h : h;
    d(static_cast<Index>(k)) = omega / tau;
  }
  return d;
}

double EndpointWeight::integrate(const Eigen::VectorXd& phi) const {
  return tail_integrals(phi)(0, 0);
}

Eigen::MatrixXd EndpointWeight::tail_integrals(const Eigen::MatrixXd& phi) const {
  const Index n = static_cast<Index>(grid_.n());
  if (phi.rows() != n + 1) throw ValidationError("weight integral: sample count does not match grid");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + 1, phi.cols());
  for (Index c = n - 1; c >= 0; --c)
    out.row(c) = out.row(c + 1) + wl_[static_cast<std::size_t>(c)] * phi.row(c) +
                 wr_[static_cast<std::size_t>(c)] * phi.row(c + 1);
  return out;
}

Eigen::MatrixXd right_integral_weighted(const EndpointWeight& w, const Eigen::MatrixXd& psi) {
  const Grid& grid = w.grid();
  const AnalyticKernel& kernel = w.kernel();
  const Index n = static_cast<Index>(grid.n());
  if (psi.rows() != n + 1) throw ValidationError("weighted integral: sample count does not match grid");
  if (!w.singular()) return psi / kernel(1.0);

  const double alpha = kernel.alpha();
  const double beta = kernel.beta();
  const double h = grid.h();
  const AnalyticKernel bar = dual_kernel(kernel);
  const double a1 = kernel(1.0);
  const double gam = gamma_fn(alpha);
  // Kernel of the right integral (order 1 - alpha) at distance r, and w at b - s = q.
  auto kbar = [&](double r) { return std::pow(r, -alpha) * bar(std::pow(r, beta)); };
  auto wq = [&](double q) { return std::pow(q, alpha - 1.0) * kernel(std::pow(q, beta)) / (gam * a1); };

  const UnitRule& rule = unit_rule();
  // kb[d][i]: kbar at r = (d + x_i) h; wv[c][i]: w at s = t_c + x_i h.
  std::vector<std::array<double, kGauss>> kb(static_cast<std::size_t>(n)), wv(static_cast<std::size_t>(n));
  for (Index d = 0; d < n; ++d)
    for (int i = 0; i < kGauss; ++i) kb[d][i] = kbar((static_cast<double>(d) + rule.x[i]) * h);
  for (Index c = 0; c < n; ++c)
    for (int i = 0; i < kGauss; ++i) wv[c][i] = wq((static_cast<double>(n - c - 1) + 1.0 - rule.x[i]) * h);

  boost::math::quadrature::tanh_sinh<double> ts;
  // Hat moments over cell c seen from node k, by tanh-sinh when an endpoint is singular.
  auto singular_moments = [&](Index k, Index c, double* m0, double* m1) {
    const double d = static_cast<double>(c - k);
    const double qn = static_cast<double>(n - c - 1);
    auto g = [&](double tau, double tauc, bool right_hat) {
      const double one_minus = tauc > 0.0 ? tauc : 1.0 - tau;
      const double r = (d + tau) * h;
      const double q = (qn + one_minus) * h;
      const double hat = right_hat ? tau : one_minus;
      return kbar(r) * wq(q) * hat;
    };
    *m0 = h * ts.integrate([&](double tau, double tauc) { return g(tau, tauc, false); }, 0.0, 1.0);
    *m1 = h * ts.integrate([&](double tau, double tauc) { return g(tau, tauc, true); }, 0.0, 1.0);
  };

  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n + 1, psi.cols());
  for (Index k = 0; k < n; ++k) {
    for (Index c = k; c < n; ++c) {
      double m0 = 0.0, m1 = 0.0;
      if (c == k || c == n - 1) {
        singular_moments(k, c, &m0, &m1);
      } else {
        const auto& kr = kb[static_cast<std::size_t>(c - k)];
        const auto& wr = wv[static_cast<std::size_t>(c)];
        for (int i = 0; i < kGauss; ++i) {
          const double v = rule.w[i] * kr[i] * wr[i];
          m0 += v * (1.0 - rule.x[i]);
          m1 += v * rule.x[i];
        }
        m0 *= h;
        m1 *= h;
      }
      f.row(k) += m0 * psi.row(c) + m1 * psi.row(c + 1);
    }
  }
  f.row(n) = psi.row(n) / (gam * a1);
  if (!f.allFinite()) throw NumericalError("weighted right integral produced non-finite values");
  return f;
}

Eigen::MatrixXd rl_right_weighted(const EndpointWeight& w, const Eigen::MatrixXd& psi) {
  const Eigen::MatrixXd f = right_integral_weighted(w, psi);
  return -fd_derivative(w.grid(), f);
}

}  // namespace akfrac

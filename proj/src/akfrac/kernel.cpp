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

#include "akfrac/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "akfrac/error.hpp"
#include "akfrac/special.hpp"

namespace akfrac {

AnalyticKernel::AnalyticKernel(std::vector<double> coeffs, double alpha, double beta, double radius)
    : coeffs_(std::move(coeffs)), alpha_(alpha), beta_(beta), radius_(radius) {
  if (coeffs_.empty()) throw ValidationError("kernel needs at least one coefficient");
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw ValidationError("kernel coefficients must be finite");
  if (!(alpha_ > 0.0 && alpha_ <= 1.0)) {
    std::ostringstream os;
    os << "kernel order alpha must lie in (0, 1], got " << alpha_;
    throw ValidationError(os.str());
  }
  if (!(beta_ >= 0.0) || !std::isfinite(beta_)) throw ValidationError("kernel beta must be >= 0");
  if (!(radius_ > 0.0)) throw ValidationError("kernel radius must be positive");
}

double AnalyticKernel::operator()(double x) const noexcept {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

void AnalyticKernel::check_interval(double length) const {
  const double reach = std::pow(length, beta_);
  if (!(reach < radius_)) {
    std::ostringstream os;
    os << "interval length " << length << " violates L^beta < R (" << reach << " >= " << radius_
       << ")";
    throw ValidationError(os.str());
  }
}

AnalyticKernel AnalyticKernel::with_orders(double alpha, double beta) const {
  return AnalyticKernel(coeffs_, alpha, beta, radius_);
}

AnalyticKernel make_kernel(std::vector<double> coeffs, double alpha, double beta, double radius) {
  return AnalyticKernel(std::move(coeffs), alpha, beta, radius);
}

AnalyticKernel make_named_kernel(const std::string& name, double alpha, double beta, double radius,
                                 std::size_t truncation) {
  if (name == "rl") return AnalyticKernel({1.0}, alpha, beta, radius);
  if (name == "exp") {
    std::vector<double> c(truncation + 1);
    double f = 1.0;
    for (std::size_t n = 0; n <= truncation; ++n) {
      if (n > 0) f /= static_cast<double>(n);
      c[n] = f;
    }
    return AnalyticKernel(std::move(c), alpha, beta, radius);
  }
  throw ValidationError("unknown kernel name '" + name + "' (expected rl, exp or custom)");
}

GammaSeries gamma_transform(const AnalyticKernel& kernel, double sigma) {
  GammaSeries out;
  out.sigma = sigma;
  out.terms.reserve(kernel.size());
  for (std::size_t n = 0; n < kernel.size(); ++n) {
    const double arg = kernel.beta() * static_cast<double>(n) + sigma;
    if (!(arg > 0.0)) {
      std::ostringstream os;
      os << "Gamma argument beta*n + sigma = " << arg << " is not positive at n = " << n;
      throw ValidationError(os.str());
    }
    out.terms.push_back(scaled_gamma(kernel.coeff(n), arg));
  }
  return out;
}

AnalyticKernel dual_kernel(const AnalyticKernel& kernel, std::optional<std::size_t> n_terms) {
  const double alpha = kernel.alpha();
  const double beta = kernel.beta();
  if (alpha >= 1.0)
    throw ValidationError("alpha = 1 has no dual kernel; the classical limit is handled directly");
  if (kernel.coeff(0) == 0.0) throw ValidationError("kernel with a_0 = 0 is not dualizable");

  const std::size_t count = n_terms.value_or(kernel.size() - 1) + 1;
  // g: Gamma transform of A at alpha; h: Gamma transform of the dual at 1 - alpha.
  std::vector<double> g(count), h(count), dual(count);
  for (std::size_t n = 0; n < count; ++n)
    g[n] = scaled_gamma(kernel.coeff(n), beta * static_cast<double>(n) + alpha);
  h[0] = 1.0 / g[0];
  for (std::size_t k = 1; k < count; ++k) {
    double s = 0.0;
    for (std::size_t m = 1; m <= k; ++m) s += g[m] * h[k - m];
    h[k] = -s / g[0];
    if (!std::isfinite(h[k]))
      throw NumericalError("dual kernel recurrence overflows at k = " + std::to_string(k));
  }
  for (std::size_t n = 0; n < count; ++n) {
    const double arg = beta * static_cast<double>(n) + 1.0 - alpha;
    dual[n] = divided_by_gamma(h[n], arg);
  }
  return AnalyticKernel(std::move(dual), 1.0 - alpha, beta, kernel.radius());
}

ConvolutionResidual convolution_residual(const AnalyticKernel& kernel, const AnalyticKernel& dual) {
  const double alpha = kernel.alpha();
  const double beta = kernel.beta();
  const std::size_t count = dual.size();
  std::vector<double> g(count), h(count);
  for (std::size_t n = 0; n < count; ++n) {
    g[n] = scaled_gamma(kernel.coeff(n), beta * static_cast<double>(n) + alpha);
    h[n] = scaled_gamma(dual.coeff(n), beta * static_cast<double>(n) + 1.0 - alpha);
  }
  ConvolutionResidual out;
  out.absolute.resize(count);
  out.scaled.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    double s = k == 0 ? -1.0 : 0.0;
    double mag = k == 0 ? 1.0 : 0.0;
    for (std::size_t m = 0; m <= k; ++m) {
      s += g[m] * h[k - m];
      mag += std::fabs(g[m] * h[k - m]);
    }
    out.absolute[k] = std::fabs(s);
    out.scaled[k] = std::fabs(s) / std::max(1.0, mag);
  }
  return out;
}

SemigroupReport semigroup_check(const CoefficientFamily& family, double alpha1, double alpha2,
                                double beta, std::size_t k_max, double tol,
                                SemigroupIndexing indexing) {
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0)) throw ValidationError("semigroup orders must be positive");
  SemigroupReport rep;
  rep.tolerance = tol;
  rep.residuals.reserve(k_max + 1);
  const double sum_order = alpha1 + alpha2;
  for (std::size_t k = 0; k <= k_max; ++k) {
    double lhs = 0.0;
    for (std::size_t n = 0; n <= k; ++n) {
      const std::size_t m = k - n;
      const double a1 = family(n, alpha1, beta);
      const double a2 = family(m, alpha2, beta);
      const double second_index = indexing == SemigroupIndexing::AsPrinted ? static_cast<double>(n)
                                                                          : static_cast<double>(m);
      lhs += scaled_gamma(a1, alpha1 + static_cast<double>(n) * beta) *
             scaled_gamma(a2, alpha2 + second_index * beta);
    }
    const double rhs = scaled_gamma(family(k, sum_order, beta), sum_order + static_cast<double>(k) * beta);
    const double r = std::fabs(lhs - rhs);
    if (!std::isfinite(r)) throw NumericalError("semigroup residual overflows at k = " + std::to_string(k));
    rep.residuals.push_back(r);
    if (r > tol && !rep.first_failure) rep.first_failure = k;
  }
  rep.passed = !rep.first_failure.has_value();
  return rep;
}

CoefficientFamily fixed_family(const AnalyticKernel& kernel) {
  return [c = std::vector<double>(kernel.coeffs().begin(), kernel.coeffs().end())](
             std::size_t n, double, double) { return n < c.size() ? c[n] : 0.0; };
}

CoefficientFamily gamma_family(const AnalyticKernel& kernel) {
  return [c = std::vector<double>(kernel.coeffs().begin(), kernel.coeffs().end()),
          alpha = kernel.alpha()](std::size_t n, double order, double beta) {
    if (n >= c.size() || c[n] == 0.0) return 0.0;
    const double nb = static_cast<double>(n) * beta;
    return c[n] * gamma_ratio(alpha + nb, order + nb);
  };
}

AnalyticKernel family_member(const CoefficientFamily& family, std::size_t size, double order,
                             double beta, double radius) {
  std::vector<double> c(size);
  for (std::size_t n = 0; n < size; ++n) c[n] = family(n, order, beta);
  // The stored alpha is clamped into the kernel's admissible range; plans take
  // the realized order explicitly.
  return AnalyticKernel(std::move(c), std::min(order, 1.0), beta, radius);
}

double series_tail_bound(const AnalyticKernel& kernel, std::size_t n_trunc, double interval_length) {
  return series_tail_bound(kernel, n_trunc, interval_length, kernel.alpha());
}

double series_tail_bound(const AnalyticKernel& kernel, std::size_t n_trunc, double interval_length,
                         double order) {
  kernel.check_interval(interval_length);
  double tail = 0.0;
  for (std::size_t n = n_trunc + 1; n < kernel.size(); ++n) {
    const double mu = order + static_cast<double>(n) * kernel.beta();
    tail += std::fabs(kernel.coeff(n)) * std::pow(interval_length, mu) / mu;
  }
  return tail;
}

}  // namespace akfrac

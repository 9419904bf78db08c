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
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace akfrac {

/// Truncated power series A(x) = sum a_n x^n together with the order alpha,
/// the exponent beta and the declared convergence radius R of the series.
///
/// The generalized operators built from a kernel integrate against
/// (t-s)^(alpha-1) A((t-s)^beta); any interval of length L bound to the
/// kernel must satisfy L^beta < R. Immutable after construction.
class AnalyticKernel {
 public:
  AnalyticKernel(std::vector<double> coeffs, double alpha, double beta,
                 double radius = std::numeric_limits<double>::infinity());

  std::span<const double> coeffs() const noexcept { return coeffs_; }
  double coeff(std::size_t n) const noexcept { return n < coeffs_.size() ? coeffs_[n] : 0.0; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double radius() const noexcept { return radius_; }

  /// Horner evaluation of the stored (truncated) series.
  double operator()(double x) const noexcept;

  /// Throws ValidationError unless length^beta < radius.
  void check_interval(double length) const;

  /// Same coefficients and radius with a different (alpha, beta).
  AnalyticKernel with_orders(double alpha, double beta) const;

 private:
  std::vector<double> coeffs_;
  double alpha_;
  double beta_;
  double radius_;
};

/// Validating constructor (the same checks as the AnalyticKernel constructor).
AnalyticKernel make_kernel(std::vector<double> coeffs, double alpha, double beta,
                           double radius = std::numeric_limits<double>::infinity());

/// Named presets: "rl" has coeffs [1]; "exp" has a_n = 1/n! for n <= truncation.
AnalyticKernel make_named_kernel(const std::string& name, double alpha, double beta,
                                 double radius = std::numeric_limits<double>::infinity(),
                                 std::size_t truncation = 20);

/// Coefficients c_n = a_n Gamma(beta n + sigma).
struct GammaSeries {
  std::vector<double> terms;
  double sigma = 0.0;
};

GammaSeries gamma_transform(const AnalyticKernel& kernel, double sigma);

/// Dual kernel whose Gamma transform (at order 1 - alpha) is the reciprocal of
/// the kernel's Gamma transform (at order alpha). Returns coefficients
/// 0..n_terms; by default as many as the source kernel stores.
AnalyticKernel dual_kernel(const AnalyticKernel& kernel,
                           std::optional<std::size_t> n_terms = std::nullopt);

/// Residuals of sum_{m+n=k} a_m Gamma(beta m + alpha) abar_n Gamma(beta n + 1 - alpha) - delta_k0
/// for k = 0 .. dual.size()-1.
struct ConvolutionResidual {
  std::vector<double> absolute;
  /// absolute[k] / max(1, sum of |terms| at k): the residual in units of the
  /// rounding scale of the sum.
  std::vector<double> scaled;
};

ConvolutionResidual convolution_residual(const AnalyticKernel& kernel, const AnalyticKernel& dual);

/// a_n(order, beta) for a family of kernels indexed by the order.
using CoefficientFamily = std::function<double(std::size_t n, double order, double beta)>;

enum class SemigroupIndexing {
  AsPrinted,  // Gamma(alpha1 + n beta) Gamma(alpha2 + n beta)
  Symmetric,  // Gamma(alpha1 + n beta) Gamma(alpha2 + m beta)
};

struct SemigroupReport {
  std::vector<double> residuals;  // one per k = 0..k_max
  double tolerance = 0.0;
  bool passed = false;
  std::optional<std::size_t> first_failure;
};

SemigroupReport semigroup_check(const CoefficientFamily& family, double alpha1, double alpha2,
                                double beta, std::size_t k_max, double tol,
                                SemigroupIndexing indexing = SemigroupIndexing::AsPrinted);

/// Family with fixed coefficients (independent of the order).
CoefficientFamily fixed_family(const AnalyticKernel& kernel);

/// Family that keeps the kernel's Gamma transform fixed across orders:
/// a_n(order) = a_n Gamma(alpha + n beta) / Gamma(order + n beta). The kernel
/// [1/Gamma(alpha)] generates the Riemann-Liouville family 1/Gamma(order).
CoefficientFamily gamma_family(const AnalyticKernel& kernel);

/// Materializes a family member as a kernel carrying the given order.
AnalyticKernel family_member(const CoefficientFamily& family, std::size_t size, double order,
                             double beta, double radius);

/// sum_{n > n_trunc} |a_n| L^(order + n beta) / (order + n beta): the sup-norm
/// error of the truncated left integral on a unit-norm function.
double series_tail_bound(const AnalyticKernel& kernel, std::size_t n_trunc, double interval_length);
double series_tail_bound(const AnalyticKernel& kernel, std::size_t n_trunc, double interval_length,
                         double order);

}  // namespace akfrac

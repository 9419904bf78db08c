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

#include "akfrac/special.hpp"

#include <cmath>
#include <string>

#include "akfrac/error.hpp"

namespace akfrac {

namespace {

void require_positive(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw NumericalError("Gamma argument must be positive and finite, got " + std::to_string(x));
}

}  // namespace

double gamma_fn(double x) {
  require_positive(x);
  const double g = std::tgamma(x);
  if (!std::isfinite(g))
    throw NumericalError("Gamma(" + std::to_string(x) + ") overflows; reduce the truncation order");
  return g;
}

double log_gamma(double x) {
  require_positive(x);
  return std::lgamma(x);
}

double gamma_ratio(double x, double y) {
  require_positive(x);
  require_positive(y);
  if (x < 170.0 && y < 170.0) return std::tgamma(x) / std::tgamma(y);
  const double r = std::exp(std::lgamma(x) - std::lgamma(y));
  if (!std::isfinite(r)) throw NumericalError("Gamma ratio overflows");
  return r;
}

double scaled_gamma(double c, double x) {
  require_positive(x);
  if (c == 0.0) return 0.0;
  if (x < 170.0) {
    const double r = c * std::tgamma(x);
    if (std::isfinite(r)) return r;
  }
  const double r = std::copysign(std::exp(std::log(std::fabs(c)) + std::lgamma(x)), c);
  if (!std::isfinite(r))
    throw NumericalError("Gamma-weighted coefficient overflows at argument " + std::to_string(x) +
                         "; reduce the truncation order");
  return r;
}

double divided_by_gamma(double c, double x) {
  require_positive(x);
  if (c == 0.0) return 0.0;
  if (x < 170.0) return c / std::tgamma(x);
  return std::copysign(std::exp(std::log(std::fabs(c)) - std::lgamma(x)), c);
}

}  // namespace akfrac

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

namespace akfrac {

/// Gamma function for positive arguments. Throws NumericalError when the
/// argument is not positive or the result overflows.
double gamma_fn(double x);

/// log Gamma(x) for x > 0.
double log_gamma(double x);

/// Gamma(x) / Gamma(y) for x, y > 0, evaluated in log space when either
/// factor alone would overflow.
double gamma_ratio(double x, double y);

/// c * Gamma(x) without forming Gamma(x) when it would overflow on its own.
double scaled_gamma(double c, double x);

/// c / Gamma(x), likewise overflow-safe.
double divided_by_gamma(double c, double x);

}  // namespace akfrac

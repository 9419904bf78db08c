#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "akfrac/grid.hpp"
#include "akfrac/kernel.hpp"

namespace akfrac::testing {

// Small deterministic generator wrapper for the property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  // Kernel with a_0 >= 0.1, |a_n| <= 1.
  AnalyticKernel kernel(std::size_t len, double alpha_lo, double alpha_hi, double beta_hi) {
    std::vector<double> c(len);
    c[0] = uniform(0.1, 1.0);
    for (std::size_t n = 1; n < len; ++n) c[n] = uniform(-1.0, 1.0);
    return AnalyticKernel(std::move(c), uniform(alpha_lo, alpha_hi), uniform(0.0, beta_hi));
  }

  // Coefficients of a random cubic.
  std::vector<double> cubic() { return {uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)}; }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double poly(const std::vector<double>& c, double t) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

inline double poly_deriv(const std::vector<double>& c, double t) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 1;) acc = acc * t + static_cast<double>(i) * c[i];
  return acc;
}

inline SampledFn sample_poly(const Grid& g, const std::vector<double>& c) {
  return SampledFn::sample(g, [&](double t) { return poly(c, t); });
}

inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace akfrac::testing

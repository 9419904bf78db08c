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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Dense>

#include "akfrac/error.hpp"
#include "akfrac/fde.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace akfrac;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SampledFn controls(const Grid& g, std::initializer_list<std::function<double(double)>> fs) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(fs.size()));
  Eigen::Index c = 0;
  for (const auto& f : fs) {
    for (std::size_t k = 0; k < g.size(); ++k) v(static_cast<Eigen::Index>(k), c) = f(g.t(k));
    ++c;
  }
  return SampledFn(g, v);
}

double sup(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

ControlSystem example_system(std::size_t n) {
  return make_control_system(make_named_kernel("exp", 1.0 / 3.0, M_PI, 1e3, 12), Grid(0.0, 2.0, n),
                             {"u1", "u2^2 + 2*t^6*u2"}, Eigen::Vector2d(0.0, std::exp(1.0)), 2);
}

}  // namespace

TEST_CASE("zero dynamics keep the initial state") {
  const auto sys = make_control_system(AnalyticKernel({1.0, 0.3}, 0.6, 1.0), Grid(0.0, 1.0, 32), {"0", "0*u1"},
                                       Eigen::Vector2d(1.5, -2.0), 1);
  const auto r = solve_forward(sys, SampledFn::zeros(sys.grid, 1));
  CHECK(r.x.values().col(0).isConstant(1.5, 0.0));
  CHECK(r.x.values().col(1).isConstant(-2.0, 0.0));
  CHECK(r.residual == 0.0);
}

TEST_CASE("system validation") {
  const AnalyticKernel K({1.0}, 0.5, 0.0);
  const Grid g(0.0, 1.0, 8);
  CHECK_THROWS_AS(make_control_system(K, g, {"x1", "x2"}, Eigen::VectorXd::Zero(1), 0), ValidationError);
  CHECK_THROWS_AS(make_control_system(K, g, {"u2"}, Eigen::VectorXd::Zero(1), 1), ValidationError);
  CHECK_THROWS_AS(make_control_system(K, g, {"lam1"}, Eigen::VectorXd::Zero(1), 0), ValidationError);
  CHECK_THROWS_AS(make_control_system(AnalyticKernel({1.0}, 1.0, 0.5), g, {"x1"}, Eigen::VectorXd::Zero(1), 0),
                  ValidationError);
  const auto sys = make_control_system(K, g, {"x1"}, Eigen::VectorXd::Zero(1), 1);
  CHECK_THROWS_AS(solve_forward(sys, SampledFn::zeros(Grid(0.0, 1.0, 9), 1)), ValidationError);
  CHECK_THROWS_AS(solve_forward(sys, SampledFn::zeros(g, 2)), ValidationError);
}

TEST_CASE("classical exponential") {
  const auto sys = make_control_system(AnalyticKernel({1.0}, 1.0, 0.0), Grid(0.0, 1.0, 1024), {"x1"},
                                       Eigen::VectorXd::Ones(1), 0);
  const auto r = solve_forward(sys, SampledFn::zeros(sys.grid, 0));
  const Eigen::VectorXd ex = sys.grid.nodes().array().exp().matrix();
  CHECK(sup(r.x.values().col(0) - ex) < 1e-4);
  CHECK(r.residual < 1e-12);
}

TEST_CASE("manufactured RL solution t^2") {
  for (double alpha : {0.3, 0.5, 0.8}) {
    CAPTURE(alpha);
    const double c = 2.0 / std::tgamma(3.0 - alpha);
    const AnalyticKernel K({1.0 / std::tgamma(alpha)}, alpha, 0.0);
    double prev = 0.0;
    for (std::size_t n : {128u, 256u}) {
      const auto sys = make_control_system(K, Grid(0.0, 1.0, n),
                                           {num(c) + "*t^" + num(2.0 - alpha) + " + sin(x1 - t^2)"},
                                           Eigen::VectorXd::Zero(1), 0);
      const auto r = solve_forward(sys, SampledFn::zeros(sys.grid, 0));
      const Eigen::VectorXd ex = sys.grid.nodes().array().square().matrix();
      const double err = sup(r.x.values().col(0) - ex);
      CHECK(err < 1e-4);
      if (prev > 0.0) CHECK(testing::observed_order(prev, err) > 0.9);
      prev = err;
      CHECK(r.x(0) == 0.0);
    }
  }
}

TEST_CASE("forward residual is re-checked post hoc") {
  testing::Gen gen(11);
  for (int rep = 0; rep < 20; ++rep) {
    const AnalyticKernel K = gen.kernel(6, 0.2, 1.0, 1.5);
    const auto sys = make_control_system(K, Grid(0.0, gen.uniform(0.5, 1.5), 64),
                                         {"0.3*sin(x1)*u1 + 0.2*x2", "0.5*cos(x1 + t) - 0.1*x2^2"},
                                         Eigen::Vector2d(gen.uniform(-1, 1), gen.uniform(-1, 1)), 1);
    const double p = gen.uniform(-1, 1);
    const auto u = controls(sys.grid, {[&](double t) { return std::sin(3 * t + p); }});
    const auto r = solve_forward(sys, u, 1e-13);
    CHECK(r.residual < 1e-10);
    CHECK(volterra_residual(sys, r.x, u) == doctest::Approx(r.residual).epsilon(1e-6).scale(1e-12));
  }
}

TEST_CASE("divergence is reported with its node") {
  const auto sys = make_control_system(AnalyticKernel({1.0}, 1.0, 0.0), Grid(0.0, 2.0, 64), {"x1^2"},
                                       Eigen::VectorXd::Ones(1), 0);
  try {
    solve_forward(sys, SampledFn::zeros(sys.grid, 0));
    FAIL("expected a NumericalError");
  } catch (const NumericalError& e) {
    REQUIRE(e.node().has_value());
    CHECK(sys.grid.t(*e.node()) > 0.9);
  }
}

TEST_CASE("variational equation: trivial and classical cases") {
  const auto sys = make_control_system(AnalyticKernel({1.0}, 1.0, 0.0), Grid(0.0, 1.0, 100), {"u1"},
                                       Eigen::VectorXd::Zero(1), 1);
  const auto u = controls(sys.grid, {[](double t) { return t; }});
  const auto x = solve_forward(sys, u).x;
  CHECK(sup(solve_variational(sys, x, u, SampledFn::zeros(sys.grid, 1)).values()) == 0.0);
  const auto h = controls(sys.grid, {[](double t) { return std::cos(5 * t); }});
  const auto eta = solve_variational(sys, x, u, h);
  double acc = 0.0;
  for (std::size_t k = 1; k <= sys.grid.n(); ++k) {
    acc += 0.5 * sys.grid.h() * (h(k - 1) + h(k));
    CHECK(eta(k) == doctest::Approx(acc).epsilon(1e-13));
  }
}

TEST_CASE("variational equation is linear in h") {
  testing::Gen gen(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto sys = make_control_system(gen.kernel(5, 0.2, 1.0, 1.0), Grid(0.0, 1.0, 64),
                                         {"x2*u1 + sin(x1)", "u1^2 - 0.3*x1*x2 + u2"},
                                         Eigen::Vector2d(0.2, -0.4), 2);
    const auto u = controls(sys.grid, {[](double t) { return 1 - t; }, [](double t) { return t * t; }});
    const auto x = solve_forward(sys, u).x;
    const double a1 = gen.uniform(0, 6), a2 = gen.uniform(0, 6), s = gen.uniform(-3, 3);
    const auto h1 = controls(sys.grid, {[&](double t) { return std::sin(a1 * t); }, [&](double t) { return t - a1; }});
    const auto h2 = controls(sys.grid, {[&](double t) { return std::cos(a2 * t); }, [&](double t) { return a2 * t; }});
    const auto e1 = solve_variational(sys, x, u, h1).values();
    const auto e2 = solve_variational(sys, x, u, h2).values();
    const auto e12 = solve_variational(sys, x, u, SampledFn(sys.grid, h1.values() + h2.values())).values();
    const auto es = solve_variational(sys, x, u, SampledFn(sys.grid, s * h1.values())).values();
    CHECK(sup(e12 - e1 - e2) <= 1e-9);
    CHECK(sup(es - s * e1) <= 1e-9);
  }
}

TEST_CASE("variational equation matches finite differences at first order") {
  const auto sys = example_system(256);
  const auto u = controls(sys.grid, {[](double t) { return t * t * std::exp(-t); },
                                     [](double t) { return -std::pow(t, 6); }});
  const auto h = controls(sys.grid, {[](double t) { return std::cos(t); }, [](double t) { return 0.5 - t; }});
  const auto x = solve_forward(sys, u).x;
  const Eigen::MatrixXd eta = solve_variational(sys, x, u, h).values();
  double err[2];
  int i = 0;
  for (double eps : {1e-3, 1e-4}) {
    const auto xe = solve_forward(sys, SampledFn(sys.grid, u.values() + eps * h.values())).x;
    err[i++] = sup(eta - (xe.values() - x.values()) / eps);
  }
  const double ratio = err[0] / err[1];
  CAPTURE(ratio);
  CHECK(ratio >= 8.0);
  CHECK(ratio <= 12.0);
}

TEST_CASE("continuity: the state perturbation is linear in epsilon") {
  const auto sys = example_system(128);
  const auto u = controls(sys.grid, {[](double t) { return t * t * std::exp(-t); },
                                     [](double t) { return -std::pow(t, 6); }});
  const auto h = controls(sys.grid, {[](double t) { return std::sin(2 * t); }, [](double t) { return 1.0; }});
  const auto x = solve_forward(sys, u).x;
  std::vector<double> e, d;
  for (int i = -10; i <= 10; ++i) {
    if (i == 0) continue;
    const double eps = 1e-3 * i;
    const auto xe = solve_forward(sys, SampledFn(sys.grid, u.values() + eps * h.values())).x;
    e.push_back(std::fabs(eps));
    d.push_back(sup(xe.values() - x.values()));
  }
  double see = 0, sed = 0, mean = 0;
  for (std::size_t i = 0; i < e.size(); ++i) see += e[i] * e[i], sed += e[i] * d[i], mean += d[i];
  mean /= static_cast<double>(d.size());
  const double K = sed / see;
  double ssr = 0, sst = 0;
  for (std::size_t i = 0; i < e.size(); ++i) ssr += std::pow(d[i] - K * e[i], 2), sst += std::pow(d[i] - mean, 2);
  CHECK(1.0 - ssr / sst >= 0.999);
}

TEST_CASE("adjoint: zero data gives zero multiplier") {
  const auto sys = make_control_system(AnalyticKernel({1.0, 0.2}, 0.4, 1.0), Grid(0.0, 1.0, 32), {"u1"},
                                       Eigen::VectorXd::Zero(1), 1);
  const auto u = SampledFn::zeros(sys.grid, 1);
  const auto x = solve_forward(sys, u).x;
  const EndpointWeight w(sys.kernel, sys.grid);
  const auto r = solve_adjoint(sys, x, u, w, Eigen::MatrixXd::Zero(33, 1));
  CHECK(sup(r.lambda.values()) == 0.0);
  CHECK(r.equation_residual == 0.0);
  CHECK(r.transversality == 0.0);
}

TEST_CASE("adjoint: classical backward oracle") {
  // lambda' = -(L_x + J_x lambda), lambda(1) = 0 with L_x = 2t, J_x = -1.
  const auto sys = make_control_system(AnalyticKernel({1.0}, 1.0, 0.0), Grid(0.0, 1.0, 512), {"-x1 + u1"},
                                       Eigen::VectorXd::Zero(1), 1);
  const auto x = SampledFn::sample(sys.grid, [](double t) { return t; });
  const auto u = SampledFn::zeros(sys.grid, 1);
  const EndpointWeight w(sys.kernel, sys.grid);
  const Eigen::MatrixXd src = 2.0 * sys.grid.nodes();
  const auto r = solve_adjoint(sys, x, u, w, src);
  for (std::size_t k = 0; k <= sys.grid.n(); ++k) {
    const double t = sys.grid.t(k);
    CHECK(r.lambda(k) == doctest::Approx(2.0 * t + 2.0 - 4.0 * std::exp(t - 1.0)).scale(1.0).epsilon(1e-6));
  }
  CHECK(r.equation_residual < 1e-12);
  CHECK(r.transversality == 0.0);
}

TEST_CASE("adjoint: frozen components act as constants") {
  const auto sys = make_control_system(AnalyticKernel({1.0}, 1.0, 0.0), Grid(0.0, 1.0, 64), {"u1", "x1"},
                                       Eigen::VectorXd::Zero(2), 1);
  const auto u = SampledFn::zeros(sys.grid, 1);
  const auto x = solve_forward(sys, u).x;
  const EndpointWeight w(sys.kernel, sys.grid);
  const auto r = solve_adjoint(sys, x, u, w, Eigen::MatrixXd::Zero(65, 2), {std::nullopt, 1.5});
  for (std::size_t k = 0; k <= sys.grid.n(); ++k) {
    CHECK(r.lambda(k, 0) == doctest::Approx(1.5 * (1.0 - sys.grid.t(k))).epsilon(1e-13).scale(1e-13));
    CHECK(r.lambda(k, 1) == 1.5);
  }
  CHECK(r.equation_residual < 1e-13);
}

TEST_CASE("adjoint: back-substitution agrees with a dense solve") {
  testing::Gen gen(3);
  for (int rep = 0; rep < 5; ++rep) {
    const AnalyticKernel K = gen.kernel(5, 0.2, 0.9, 1.5);
    const double jx = gen.uniform(-1, 1);
    const std::size_t n = 64;
    const auto sys = make_control_system(K, Grid(0.0, 1.0, n), {num(jx) + "*x1 + u1"}, Eigen::VectorXd::Zero(1), 1);
    const auto u = controls(sys.grid, {[](double t) { return std::cos(t); }});
    const auto x = solve_forward(sys, u).x;
    const EndpointWeight w(K, sys.grid);
    const Eigen::MatrixXd src = sys.grid.nodes().array().sin().matrix();
    const auto r = solve_adjoint(sys, x, u, w, src);

    // All node values at once: rows k < n carry the integrated equation, row n the closure.
    const Eigen::MatrixXd WR = build_plan(dual_kernel(K), sys.grid, Side::Right).dense();
    const auto N = static_cast<Eigen::Index>(n + 1);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N, N);
    const double h = sys.grid.h();
    for (Eigen::Index k = 0; k < N - 1; ++k)
      for (Eigen::Index c = k; c < N - 1; ++c) T(k, c) += 0.5 * h, T(k, c + 1) += 0.5 * h;
    Eigen::MatrixXd M = WR - jx * T;
    M.row(N - 1).setZero();
    M(N - 1, N - 1) = 1.0;
    Eigen::VectorXd rhs = w.tail_integrals(src);
    rhs(N - 1) = 0.0;
    const Eigen::VectorXd dense = M.fullPivLu().solve(rhs);
    // Kernels with large dual coefficients give large multipliers; compare relative to them.
    const double scale = 1.0 + sup(dense);
    CHECK(sup(dense - r.lambda.values().col(0)) <= 1e-10 * scale);
    CHECK(r.equation_residual <= 1e-10 * scale);
    CHECK(sup(r.lambda.values()) > 0.0);
  }
}

TEST_CASE("adjoint of the worked example vanishes") {
  const auto sys = example_system(512);
  const auto u = controls(sys.grid, {[](double t) { return t * t * std::exp(-t); },
                                     [](double t) { return -std::pow(t, 6); }});
  const auto x = controls(sys.grid, {[](double t) { return t * t; }, [](double t) { return std::exp(1.0 - t); }});
  const EndpointWeight w(sys.kernel, sys.grid);
  // -grad_x of the squared distance to (t^2, e^(1-t)).
  Eigen::MatrixXd src(513, 2);
  for (std::size_t k = 0; k <= 512; ++k) {
    const double t = sys.grid.t(k);
    src(static_cast<Eigen::Index>(k), 0) = -2.0 * (x(k, 0) - t * t);
    src(static_cast<Eigen::Index>(k), 1) = -2.0 * (x(k, 1) - std::exp(1.0 - t));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = solve_adjoint(sys, x, u, w, src);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 5.0);
  CHECK(sup(r.lambda.values()) <= 1e-14);
  CHECK(r.equation_residual <= 1e-10);
  CHECK(r.transversality <= 1e-12);
}

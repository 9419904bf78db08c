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

#include <Eigen/Dense>

#include "akfrac/error.hpp"
#include "akfrac/pmp.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace akfrac;

namespace {

SampledFn columns(const Grid& g, std::initializer_list<std::function<double(double)>> fs) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(fs.size()));
  Eigen::Index c = 0;
  for (const auto& f : fs) {
    for (std::size_t k = 0; k < g.size(); ++k) v(static_cast<Eigen::Index>(k), c) = f(g.t(k));
    ++c;
  }
  return SampledFn(g, v);
}

OCProblem example_problem(std::size_t n) {
  auto sys = make_control_system(make_named_kernel("exp", 1.0 / 3.0, M_PI, 1e3, 12), Grid(0.0, 2.0, n),
                                 {"u1", "u2^2 + 2*t^6*u2"}, Eigen::Vector2d(0.0, std::exp(1.0)), 2);
  return make_oc_problem(std::move(sys),
                         "-((x1 - t^2)^2 + (x2 - exp(1 - t))^2 + (u1 - t^2*exp(-t))^2 + (u2 + t^6)^2)");
}

Candidate example_candidate(const Grid& g) {
  return Candidate{columns(g, {[](double t) { return t * t; }, [](double t) { return std::exp(1.0 - t); }}),
                   columns(g, {[](double t) { return t * t * std::exp(-t); }, [](double t) { return -std::pow(t, 6); }}),
                   SampledFn::zeros(g, 2), 1.0};
}

OCProblem lq_problem(std::size_t n) {
  auto sys = make_control_system(AnalyticKernel({1.0}, 1.0, 0.0), Grid(0.0, 1.0, n), {"u1"},
                                 Eigen::VectorXd::Ones(1), 1);
  return make_oc_problem(std::move(sys), "-(x1^2 + u1^2)");
}

double sup(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("objective oracles") {
  const Grid g(0.0, 1.0, 64);
  {
    auto p = make_oc_problem(make_control_system(AnalyticKernel({1.0}, 0.5, 0.0), g, {"u1"},
                                                 Eigen::VectorXd::Zero(1), 1), "0*x1");
    const auto z = SampledFn::zeros(g, 1);
    CHECK(objective(p, z, z) == 0.0);
    p.L = Expr::parse("1", p.system.dims());
    CHECK(objective(p, z, z) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-13));
  }
  {
    const Grid fine(0.0, 1.0, 1000);
    const auto p = make_oc_problem(make_control_system(AnalyticKernel({1.0}, 1.0, 0.0), fine, {"u1"},
                                                       Eigen::VectorXd::Zero(1), 1), "u1^2");
    const auto u = SampledFn::sample(fine, [](double t) { return t; });
    CHECK(std::fabs(objective(p, SampledFn::zeros(fine, 1), u) - 1.0 / 3.0) < 1e-6);
  }
}

TEST_CASE("Hamiltonian of the worked example") {
  const auto p = example_problem(64);
  const EndpointWeight w(p.system.kernel, p.system.grid);
  const double H = hamiltonian(p, w, 1.0, Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(std::exp(-1.0), -1.0), 1.0,
                               Eigen::Vector2d::Zero());
  CHECK(H == 0.0);
  CHECK(hamiltonian(p, w, 0.5, Eigen::Vector2d(3.0, 1.0), Eigen::Vector2d(1.0, -1.0), 0.0, Eigen::Vector2d::Zero()) ==
        0.0);
  CHECK_THROWS_AS(hamiltonian(p, w, 2.0, Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(1.0, 1.0), 1.0,
                              Eigen::Vector2d::Zero()),
                  NumericalError);
}

TEST_CASE("Hamiltonian is affine in the multipliers") {
  testing::Gen gen(21);
  const auto p = example_problem(64);
  const EndpointWeight w(p.system.kernel, p.system.grid);
  for (int rep = 0; rep < 200; ++rep) {
    const double t = gen.uniform(0.0, 1.99);
    const Eigen::Vector2d x(gen.uniform(-2, 2), gen.uniform(-2, 2)), u(gen.uniform(-2, 2), gen.uniform(-2, 2));
    const Eigen::Vector2d l1(gen.uniform(-2, 2), gen.uniform(-2, 2)), l2(gen.uniform(-2, 2), gen.uniform(-2, 2));
    const double h12 = hamiltonian(p, w, t, x, u, 1.0, l1 + l2);
    const double h1 = hamiltonian(p, w, t, x, u, 1.0, l1);
    const double h2 = hamiltonian(p, w, t, x, u, 0.0, l2);
    const double h0 = hamiltonian(p, w, t, x, u, 0.0, Eigen::Vector2d::Zero());
    CHECK(std::fabs(h12 - h1 - h2 + h0) <= 1e-12 * (1.0 + std::fabs(h12)));
  }
}

TEST_CASE("check_pmp at the worked example extremal") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = example_problem(512);
  const Candidate c = example_candidate(p.system.grid);
  const ResidualReport r = check_pmp(p, c);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 5.0);
  CHECK(r.opt_res <= 1e-10);
  CHECK(r.adj_res <= 1e-10);
  CHECK(r.trans_res <= 1e-12);
  CHECK(r.nontriviality);
  CHECK(std::isfinite(r.dynamics_res));
  CHECK(r.J == 0.0);

  Candidate bumped = c;
  bumped.u = SampledFn(c.u.grid(), c.u.values().array() + 0.1);
  CHECK(check_pmp(p, bumped).opt_res > 0.0);

  Candidate abnormal = c;
  abnormal.lambda0 = 0.0;
  CHECK_FALSE(check_pmp(p, abnormal).nontriviality);
}

TEST_CASE("sweep recovers a tracked control") {
  for (double alpha : {1.0, 0.6}) {
    CAPTURE(alpha);
    auto sys = make_control_system(AnalyticKernel({1.0}, alpha, 0.0), Grid(0.0, 1.0, 64), {"sin(x1) + t"},
                                   Eigen::VectorXd::Zero(1), 1);
    const auto p = make_oc_problem(std::move(sys), "-(u1 - cos(3*t))^2");
    SweepOptions opt;
    opt.step = 0.2;
    opt.tol = 1e-9;
    const auto r = solve_ocp(p, SampledFn::zeros(p.system.grid, 1), opt);
    REQUIRE(r.converged);
    for (std::size_t k = 0; k < optimality_nodes(p); ++k)
      CHECK(r.candidate.u(k) == doctest::Approx(std::cos(3.0 * p.system.grid.t(k))).epsilon(1e-8));
    CHECK(check_pmp(p, r.candidate).opt_res <= opt.tol);
  }
}

TEST_CASE("classical LQ sweep matches the boundary-value oracle") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = lq_problem(500);
  SweepOptions opt;
  opt.step = 0.4;
  opt.tol = 1e-8;
  const auto r = solve_ocp(p, SampledFn::zeros(p.system.grid, 1), opt);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 10.0);
  REQUIRE(r.converged);
  const double ch = std::cosh(1.0);
  for (std::size_t k = 0; k <= 500; ++k) {
    const double t = p.system.grid.t(k);
    CHECK(std::fabs(r.candidate.u(k) + std::sinh(1.0 - t) / ch) < 1e-3);
    CHECK(std::fabs(r.candidate.x(k) - std::cosh(1.0 - t) / ch) < 1e-3);
  }
  CHECK(std::fabs(r.history.back().J + std::tanh(1.0)) < 1e-3);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i].J >= r.history[i - 1].J - 1e-12);
  CHECK(check_pmp(p, r.candidate).opt_res <= opt.tol);
}

TEST_CASE("warm start at the worked example is a fixed point") {
  const auto p = example_problem(256);
  const Candidate c = example_candidate(p.system.grid);
  SweepOptions opt;
  opt.x0 = c.x;
  const auto r = solve_ocp(p, c.u, opt);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.history.size() == 1);
}

TEST_CASE("sweep option validation") {
  const auto p = lq_problem(16);
  SweepOptions opt;
  opt.step = 0.0;
  CHECK_THROWS_AS(solve_ocp(p, SampledFn::zeros(p.system.grid, 1), opt), ValidationError);
  CHECK_THROWS_AS(solve_ocp(p, SampledFn::zeros(p.system.grid, 2)), ValidationError);
}

TEST_CASE("check_pmp is a pure function of the candidate") {
  testing::Gen gen(88);
  const auto p = example_problem(64);
  const Grid& g = p.system.grid;
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd x(65, 2), u(65, 2), l(65, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x.data()[i] = gen.uniform(-1, 1);
      u.data()[i] = gen.uniform(-1, 1);
      l.data()[i] = gen.uniform(-1, 1);
    }
    const Candidate c{SampledFn(g, x), SampledFn(g, u), SampledFn(g, l), 1.0};
    const ResidualReport a = check_pmp(p, c);
    const Candidate copy = c;
    (void)check_pmp(p, Candidate{SampledFn(g, -x), SampledFn(g, u), SampledFn(g, l), 0.0});
    const ResidualReport b = check_pmp(p, copy);
    CHECK(a.opt_res == b.opt_res);
    CHECK(a.adj_res == b.adj_res);
    CHECK(a.trans_res == b.trans_res);
    CHECK(a.dynamics_res == b.dynamics_res);
    CHECK(a.J == b.J);
  }
}

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

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"

#include "akfrac.h"
#include "json.hpp"

extern "C" int akf_c_smoke(void);

TEST_CASE("header compiles as C and the library links") { CHECK(akf_c_smoke() == 1); }

TEST_CASE("version and empty error after success") {
  CHECK(std::string(akf_version()).size() > 0);
  akf_kernel* k = nullptr;
  REQUIRE(akf_kernel_named("rl", 0.5, 0.0, INFINITY, 0, &k) == AKF_OK);
  CHECK(std::string(akf_last_error()).empty());
  CHECK(std::string(akf_last_error_json()).empty());
  akf_kernel_free(k);
}

TEST_CASE("kernel handles") {
  const double c[] = {1.0, 0.5, 0.25};
  akf_kernel* k = nullptr;
  REQUIRE(akf_kernel_create(c, 3, 0.5, 1.0, INFINITY, &k) == AKF_OK);
  size_t len = 0;
  double buf[8];
  REQUIRE(akf_kernel_coefficients(k, buf, 8, &len) == AKF_OK);
  CHECK(len == 3);
  CHECK(buf[2] == 0.25);
  // Size query without a buffer.
  CHECK(akf_kernel_coefficients(k, nullptr, 0, &len) == AKF_OK);
  CHECK(len == 3);

  REQUIRE(akf_kernel_gamma_transform(k, 0.5, buf, 8, &len) == AKF_OK);
  CHECK(buf[1] == doctest::Approx(0.5 * std::tgamma(1.5)));

  // Dual: a_0 Gamma(alpha) abar_0 Gamma(1 - alpha) = 1.
  akf_kernel* d = nullptr;
  REQUIRE(akf_kernel_dual(k, 6, &d) == AKF_OK);
  REQUIRE(akf_kernel_coefficients(d, buf, 8, &len) == AKF_OK);
  CHECK(len == 7);
  CHECK(buf[0] * std::tgamma(0.5) * std::tgamma(0.5) == doctest::Approx(1.0).epsilon(1e-14));

  double tail = -1.0;
  CHECK(akf_kernel_tail_bound(k, 2, 1.0, &tail) == AKF_OK);
  CHECK(tail == 0.0);
  akf_kernel_free(d);
  akf_kernel_free(k);
}

TEST_CASE("validation errors come back as codes") {
  akf_kernel* k = nullptr;
  CHECK(akf_kernel_create(nullptr, 0, 0.5, 0.0, INFINITY, &k) == AKF_VALIDATION);
  CHECK(k == nullptr);
  CHECK(std::string(akf_last_error()).size() > 0);
  const auto j = nlohmann::json::parse(akf_last_error_json());
  CHECK(j.at("error") == "validation");
  CHECK(j.at("exit_code") == 1);
  const double c[] = {1.0};
  CHECK(akf_kernel_create(c, 1, 1.5, 0.0, INFINITY, &k) == AKF_VALIDATION);
  CHECK(akf_kernel_named("bogus", 0.5, 0.0, INFINITY, 0, &k) == AKF_VALIDATION);
  CHECK(akf_kernel_coefficients(nullptr, nullptr, 0, nullptr) == AKF_VALIDATION);
  akf_kernel_free(nullptr);
  akf_plan_free(nullptr);
  akf_expr_free(nullptr);
}

TEST_CASE("plans apply the RL integral") {
  akf_kernel* k = nullptr;
  REQUIRE(akf_kernel_named("rl", 0.5, 0.0, INFINITY, 0, &k) == AKF_OK);
  akf_plan* p = nullptr;
  REQUIRE(akf_plan_build(k, 0.0, 1.0, 1024, AKF_LEFT, NAN, &p) == AKF_OK);
  std::vector<double> x(1025, 1.0), y(1025);
  REQUIRE(akf_plan_apply(p, x.data(), x.size(), y.data()) == AKF_OK);
  CHECK(std::fabs(y.back() - 2.0) <= 5e-3);
  CHECK(akf_plan_apply(p, x.data(), 10, y.data()) == AKF_VALIDATION);
  double tail = -1;
  CHECK(akf_plan_tail_estimate(p, &tail) == AKF_OK);
  CHECK(tail == 0.0);
  akf_plan* bad = nullptr;
  CHECK(akf_plan_build(k, 0.0, 1.0, 0, AKF_LEFT, NAN, &bad) == AKF_VALIDATION);
  CHECK(akf_plan_build(k, 0.0, 1.0, 8, static_cast<akf_side>(7), NAN, &bad) == AKF_VALIDATION);
  akf_plan_free(p);
  akf_kernel_free(k);
}

TEST_CASE("expressions evaluate and differentiate") {
  akf_expr* e = nullptr;
  REQUIRE(akf_expr_parse("x1*u1 + sin(t)", 1, 1, &e) == AKF_OK);
  const double env[] = {0.5, 2.0, 3.0};
  double v = 0;
  REQUIRE(akf_expr_eval(e, env, 3, &v) == AKF_OK);
  CHECK(v == doctest::Approx(6.0 + std::sin(0.5)));
  double g[2];
  REQUIRE(akf_expr_gradient(e, env, 3, &v, g) == AKF_OK);
  CHECK(g[0] == 3.0);
  CHECK(g[1] == 2.0);
  CHECK(akf_expr_eval(e, env, 2, &v) == AKF_VALIDATION);
  akf_expr_free(e);

  REQUIRE(akf_expr_parse("ln(x1)", 1, 0, &e) == AKF_OK);
  const double bad[] = {0.0, -1.0};
  CHECK(akf_expr_eval(e, bad, 2, &v) == AKF_NUMERICAL);
  akf_expr_free(e);
  CHECK(akf_expr_parse("x1 +", 1, 0, &e) == AKF_VALIDATION);
  CHECK(akf_expr_parse("x2", 1, 0, &e) == AKF_VALIDATION);
}

TEST_CASE("run_task reports missing files as I/O errors") {
  CHECK(akf_run_task("op apply", "/nonexistent/problem.json", "/tmp", nullptr) == AKF_IO);
  CHECK(nlohmann::json::parse(akf_last_error_json()).at("exit_code") == 3);
  CHECK(akf_run_task(nullptr, "x", "y", nullptr) == AKF_VALIDATION);
}

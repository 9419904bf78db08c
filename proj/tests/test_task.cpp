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
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "akfrac/error.hpp"
#include "akfrac/io.hpp"
#include "akfrac/task.hpp"
#include "support.hpp"

using namespace akfrac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("akfrac_test_task_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json rl_problem(double alpha, std::size_t n) {
  return json{{"kernel", {{"name", "rl"}, {"alpha", alpha}, {"beta", 0.0}}},
              {"interval", {{"a", 0.0}, {"b", 1.0}}},
              {"grid", {{"n", n}}}};
}

}  // namespace

TEST_CASE("csv round trip is bit exact") {
  akfrac::testing::Gen gen(77);
  const Grid g(0.0, 1.0, 37);
  Eigen::MatrixXd v(38, 3);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = gen.uniform(-1e3, 1e3) * std::pow(10.0, gen.integer(-20, 20));
  const fs::path dir = scratch("csv");
  const Table t = to_table(SampledFn(g, v), "x");
  write_csv(dir / "a.csv", t);
  const Table back = read_csv(dir / "a.csv");
  CHECK(back.header == std::vector<std::string>{"t", "x1", "x2", "x3"});
  CHECK(back.values == t.values);
  CHECK(table_on_grid(back, g, "a").values() == v);
  CHECK_THROWS_AS(table_on_grid(back, Grid(0.0, 1.0, 36), "a"), ValidationError);
  CHECK_THROWS_AS(table_on_grid(back, Grid(0.0, 2.0, 37), "a"), ValidationError);
}

TEST_CASE("csv and json failures map to error kinds") {
  const fs::path dir = scratch("bad");
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), IoError);
  CHECK_THROWS_AS(read_json(dir / "missing.json"), IoError);
  std::ofstream(dir / "bad.csv") << "t,v1\n0,1\n0.5,x\n";
  CHECK_THROWS_AS(read_csv(dir / "bad.csv"), ValidationError);
  std::ofstream(dir / "ragged.csv") << "t,v1\n0,1,2\n";
  CHECK_THROWS_AS(read_csv(dir / "ragged.csv"), ValidationError);
  std::ofstream(dir / "bad.json") << "{\"kernel\": ";
  CHECK_THROWS_AS(read_json(dir / "bad.json"), ValidationError);
}

TEST_CASE("report keys are sorted") {
  const fs::path dir = scratch("json");
  write_json(dir / "r.json", json{{"zeta", 1}, {"alpha", 2}, {"mid", {{"b", 1}, {"a", 2}}}});
  std::ifstream in(dir / "r.json");
  const std::string s((std::istreambuf_iterator<char>(in)), {});
  CHECK(s.find("\"alpha\"") < s.find("\"mid\""));
  CHECK(s.find("\"mid\"") < s.find("\"zeta\""));
  CHECK(s.find("\"a\"") < s.find("\"b\""));
}

TEST_CASE("op apply reproduces the RL closed form") {
  json p = rl_problem(0.5, 1024);
  p["operator"] = {{"function", "1"}};
  const TaskOutput out = run_task("op apply", p, ".");
  const Eigen::Index last = out.result.values.rows() - 1;
  CHECK(out.result.header == std::vector<std::string>{"t", "v1"});
  CHECK(std::fabs(out.result.values(last, 1) - 2.0) <= 5e-3);
  // Gamma(alpha) I^alpha t = Gamma(alpha) t^(1+alpha) / Gamma(2+alpha), exact for affine input.
  p["operator"] = {{"function", "t"}};
  const TaskOutput lin = run_task("op apply", p, ".", TaskOverrides{64, std::nullopt});
  CHECK(lin.result.values.rows() == 65);
  CHECK(lin.result.values(64, 1) == doctest::Approx(std::tgamma(0.5) / std::tgamma(2.5)).epsilon(1e-10));
}

TEST_CASE("task sections are validated") {
  json p = rl_problem(0.5, 16);
  CHECK_THROWS_AS(run_task("op apply", p, "."), ValidationError);
  p["operator"] = {{"function", "1"}};
  CHECK_THROWS_AS(run_task("solve ocp", p, "."), ValidationError);
  CHECK_THROWS_AS(run_task("op nothing", p, "."), ValidationError);
  p["fde"] = {{"dynamics", {"x1"}}, {"x0", {1.0}}};
  CHECK_THROWS_AS(run_task("op apply", p, "."), ValidationError);
  p.erase("fde");
  p["kernel"]["alpha"] = "half";
  CHECK_THROWS_AS(run_task("op apply", p, "."), ValidationError);
  p["kernel"] = {{"name", "nope"}, {"alpha", 0.5}};
  CHECK_THROWS_AS(run_task("op apply", p, "."), ValidationError);
  p = rl_problem(0.5, 16);
  p["operator"] = {{"function", "1"}};
  CHECK_THROWS_AS(run_task("op apply", p, ".", TaskOverrides{0, std::nullopt}), ValidationError);
  CHECK_THROWS_AS(run_task("op apply", p, ".", TaskOverrides{std::nullopt, -1.0}), ValidationError);
}

TEST_CASE("csv inputs are read relative to the problem file") {
  const fs::path dir = scratch("rel");
  const Grid g(0.0, 1.0, 8);
  write_csv(dir / "u.csv", to_table(SampledFn::sample(g, [](double t) { return std::cos(t); })));
  json p = rl_problem(1.0, 8);
  p["fde"] = {{"dynamics", {"u1"}}, {"x0", {0.0}}, {"control_csv", "u.csv"}};
  const TaskOutput out = run_task("solve fde", p, dir);
  CHECK(out.result.header == std::vector<std::string>{"t", "x1", "u1"});
  // Trapezoid integral of cos, product integration on the hat basis.
  const double h = 1.0 / 8;
  double acc = 0.0;
  for (int k = 0; k < 8; ++k) acc += 0.5 * h * (std::cos(k * h) + std::cos((k + 1) * h));
  CHECK(out.result.values(8, 1) == doctest::Approx(acc).epsilon(1e-12));
  p["fde"]["control_csv"] = "absent.csv";
  CHECK_THROWS_AS(run_task("solve fde", p, dir), IoError);
}

TEST_CASE("every command runs on a small problem") {
  json base = rl_problem(0.6, 32);

  json p = base;
  p["operator"] = {{"function", "1 + t^2"}, {"partner", "t - t^3"}};
  CHECK(run_task("op check-duality", p, ".").report.at("duality_residual").get<double>() < 1e-2);
  CHECK(run_task("op check-ibp", p, ".").report.at("ibp_residual").get<double>() < 1e-1);
  p["operator"]["operation"] = "caputo";
  CHECK(run_task("op apply", p, ".").result.values.allFinite());
  p["operator"]["operation"] = "rl";
  p["operator"]["side"] = "right";
  CHECK_NOTHROW(run_task("op apply", p, "."));

  p = base;
  p["gronwall"] = {{"a_expr", "1"}, {"g_expr", "0.2"}, {"k_max", 10}, {"u_expr", "1"}};
  CHECK(run_task("op gronwall", p, ".").report.at("verified").get<bool>());

  p = base;
  p["kernel"] = {{"name", "custom"}, {"coeffs", {1.0, 0.5, 0.25}}, {"alpha", 0.5}, {"beta", 1.0}};
  const TaskOutput d = run_task("kernel dual", p, ".");
  CHECK(d.result.header.size() == 4);
  CHECK(d.report.at("max_scaled_residual").get<double>() <= 1e-12);
  CHECK(d.report.contains("tail_bound"));
  CHECK_NOTHROW(run_task("kernel semigroup", p, "."));

  p = base;
  p["fde"] = {{"dynamics", {"-x1 + u1"}}, {"x0", {1.0}}, {"control", {"sin(t)"}}, {"variation", {"1"}}};
  const TaskOutput f = run_task("solve fde", p, ".");
  CHECK(f.result.header == std::vector<std::string>{"t", "x1", "u1", "eta1"});
  CHECK(f.report.at("residual").get<double>() < 1e-10);

  p = base;
  p["cov"] = {{"lagrangian", "-(v1^2)"}, {"xa", {0.0}}, {"xb", {1.0}}, {"x", {"t^2"}}};
  const TaskOutput el = run_task("check el", p, ".");
  CHECK(el.report.at("reduction_gap").get<double>() < 1e-8);
}

TEST_CASE("sweep non-convergence is a numerical error with its iteration") {
  json p = rl_problem(1.0, 50);
  p["ocp"] = {{"dynamics", {"u1"}}, {"lagrangian", "-(x1^2 + u1^2)"}, {"x0", {1.0}},
              {"solver", {{"max_iter", 2}, {"tol", 1e-12}}}};
  try {
    run_task("solve ocp", p, ".");
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    REQUIRE(e.iteration().has_value());
    CHECK(*e.iteration() == 2);
  }
}

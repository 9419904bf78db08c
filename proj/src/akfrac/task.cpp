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

#include "akfrac/task.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "akfrac/error.hpp"
#include "akfrac/expr.hpp"
#include "akfrac/fde.hpp"
#include "akfrac/fracops.hpp"
#include "akfrac/kernel.hpp"
#include "akfrac/pmp.hpp"
#include "akfrac/variational.hpp"
#include "akfrac/weight.hpp"

namespace akfrac {

namespace {

using json = nlohmann::json;
using Index = Eigen::Index;
namespace fs = std::filesystem;

const char* const kSections[] = {"operator", "fde", "ocp", "candidate", "cov", "iso", "gronwall", "semigroup"};

// Field access with ValidationError messages that name the JSON path.
struct Obj {
  const json& j;
  std::string path;

  bool has(const char* key) const { return j.contains(key) && !j.at(key).is_null(); }

  const json& at(const char* key) const {
    if (!has(key)) throw ValidationError(path + "." + key + " is required");
    return j.at(key);
  }
  Obj sub(const char* key) const {
    const json& s = at(key);
    if (!s.is_object()) throw ValidationError(path + "." + key + " must be an object");
    return Obj{s, path + "." + key};
  }
  double num(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ValidationError(path + "." + key + " must be a number");
    return v.get<double>();
  }
  double num(const char* key, double fallback) const { return has(key) ? num(key) : fallback; }
  std::size_t count(const char* key) const {
    const json& v = at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ValidationError(path + "." + key + " must be a non-negative integer");
    return v.get<std::size_t>();
  }
  std::size_t count(const char* key, std::size_t fallback) const { return has(key) ? count(key) : fallback; }
  std::string str(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ValidationError(path + "." + key + " must be a string");
    return v.get<std::string>();
  }
  std::string str(const char* key, const std::string& fallback) const { return has(key) ? str(key) : fallback; }
  // A string or an array of strings.
  std::vector<std::string> strings(const char* key) const {
    const json& v = at(key);
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array() || v.empty()) throw ValidationError(path + "." + key + " must be a string or a non-empty array");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ValidationError(path + "." + key + " entries must be strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }
  Eigen::VectorXd vec(const char* key) const {
    const json& v = at(key);
    if (v.is_number()) return Eigen::VectorXd::Constant(1, v.get<double>());
    if (!v.is_array()) throw ValidationError(path + "." + key + " must be a number or an array of numbers");
    Eigen::VectorXd out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ValidationError(path + "." + key + " entries must be numbers");
      out(static_cast<Index>(i)) = v[i].get<double>();
    }
    return out;
  }
};

struct Context {
  Obj root;
  fs::path base;
  TaskOverrides ov;

  AnalyticKernel kernel() const {
    const Obj k = root.sub("kernel");
    const double alpha = k.num("alpha");
    const double beta = k.num("beta", 0.0);
    const double radius = k.num("radius", std::numeric_limits<double>::infinity());
    const std::string name = k.str("name", k.has("coeffs") ? "custom" : "");
    if (name == "rl" || name == "exp") return make_named_kernel(name, alpha, beta, radius, k.count("truncation", 20));
    if (name != "custom") throw ValidationError("kernel.name must be rl, exp or custom");
    std::vector<double> c;
    const Eigen::VectorXd cv = k.vec("coeffs");
    c.assign(cv.data(), cv.data() + cv.size());
    if (k.has("truncation")) c.resize(std::min(c.size(), k.count("truncation") + 1));
    return make_kernel(std::move(c), alpha, beta, radius);
  }

  std::pair<double, double> interval() const {
    const Obj i = root.sub("interval");
    return {i.num("a"), i.num("b")};
  }

  Grid grid() const {
    const auto [a, b] = interval();
    const std::size_t n = ov.grid_n ? *ov.grid_n : root.sub("grid").count("n");
    return Grid(a, b, n);
  }

  double tol(double fallback) const { return ov.tol ? *ov.tol : fallback; }

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
  }
};

// Functions of t given either as expressions (key) or as a CSV file (key_csv).
SampledFn sampled(const Context& ctx, const Obj& o, const std::string& key, const Grid& g) {
  const std::string csv = key + "_csv";
  if (o.has(csv.c_str())) return table_on_grid(read_csv(ctx.resolve(o.str(csv.c_str()))), g, o.path + "." + csv);
  const auto srcs = o.strings(key.c_str());
  const Dims d{};
  Eigen::MatrixXd v(static_cast<Index>(g.size()), static_cast<Index>(srcs.size()));
  for (std::size_t c = 0; c < srcs.size(); ++c) {
    const Expr e = Expr::parse(srcs[c], d);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double t = g.t(k);
      try {
        v(static_cast<Index>(k), static_cast<Index>(c)) = e.eval(std::span<const double>(&t, 1));
      } catch (const NumericalError& err) {
        throw NumericalError(o.path + "." + key + ": " + err.what(), k);
      }
    }
  }
  return SampledFn(g, v);
}

bool has_sampled(const Obj& o, const std::string& key) {
  return o.has(key.c_str()) || o.has((key + "_csv").c_str());
}

void require_cols(const SampledFn& f, std::size_t cols, const std::string& what) {
  if (static_cast<std::size_t>(f.cols()) != cols)
    throw ValidationError(what + " has " + std::to_string(f.cols()) + " columns, expected " + std::to_string(cols));
}

double sup(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Side parse_side(const std::string& s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  throw ValidationError("side must be left or right");
}

GronwallFamily parse_family(const std::string& s) {
  if (s == "gamma") return GronwallFamily::Gamma;
  if (s == "fixed") return GronwallFamily::Fixed;
  throw ValidationError("family must be gamma or fixed");
}

json semigroup_json(const SemigroupReport& r) {
  json j;
  j["passed"] = r.passed;
  j["tolerance"] = r.tolerance;
  j["max_residual"] = r.residuals.empty() ? 0.0 : *std::max_element(r.residuals.begin(), r.residuals.end());
  j["first_failure"] = r.first_failure ? json(*r.first_failure) : json(nullptr);
  return j;
}

json residual_json(const ResidualReport& r) {
  return json{{"opt_res", r.opt_res},         {"adj_res", r.adj_res}, {"trans_res", r.trans_res},
              {"dynamics_res", r.dynamics_res}, {"nontriviality", r.nontriviality}, {"J", r.J}};
}

Table trajectories(const SampledFn& x, const SampledFn& u, const SampledFn* lambda) {
  Table t = to_table(x, "x");
  append_columns(t, u, "u");
  if (lambda) append_columns(t, *lambda, "lambda");
  return t;
}

SweepOptions sweep_options(const Context& ctx, const Obj& o, double default_tol) {
  SweepOptions s;
  if (!o.has("solver")) {
    s.tol = ctx.tol(default_tol);
    return s;
  }
  const Obj sv = o.sub("solver");
  s.step = sv.num("step", s.step);
  s.tol = ctx.tol(sv.num("tol", default_tol));
  s.max_iter = sv.count("max_iter", s.max_iter);
  s.max_halvings = sv.count("max_halvings", s.max_halvings);
  return s;
}

// ---- op ----

TaskOutput op_apply(const Context& ctx) {
  const Obj o = ctx.root.sub("operator");
  const AnalyticKernel k = ctx.kernel();
  const Grid g = ctx.grid();
  const SampledFn x = sampled(ctx, o, "function", g);
  const std::string op = o.str("operation", "integral");
  const Side side = parse_side(o.str("side", "left"));
  json rep{{"operation", op}, {"side", o.str("side", "left")}};
  SampledFn y = x;
  if (op == "integral") {
    const double order = o.num("order", k.alpha());
    const OperatorPlan plan = build_plan(k, g, side, order);
    y = plan.apply(x);
    rep["order"] = order;
    rep["truncation"] = plan.truncation();
    rep["tail_estimate"] = plan.tail_estimate();
  } else if (op == "caputo") {
    y = caputo_derivative(k, g, side, x);
    rep["order"] = k.alpha();
  } else if (op == "rl") {
    y = rl_derivative(k, g, side, x);
    rep["order"] = k.alpha();
  } else {
    throw ValidationError("operator.operation must be integral, caputo or rl");
  }
  if (!y.values().allFinite()) throw NumericalError("operator result is not finite");
  rep["final_value"] = std::vector<double>(y.values().row(y.values().rows() - 1).data(),
                                           y.values().row(y.values().rows() - 1).data() + y.cols());
  return {to_table(y), rep};
}

TaskOutput op_duality(const Context& ctx) {
  const Obj o = ctx.root.sub("operator");
  const AnalyticKernel k = ctx.kernel();
  const Grid g = ctx.grid();
  const SampledFn x = sampled(ctx, o, "function", g);
  const SampledFn y = sampled(ctx, o, "partner", g);
  require_cols(x, 1, "operator.function");
  require_cols(y, 1, "operator.partner");
  const double order = o.num("order", k.alpha());
  const double res = duality_residual(k, g, order, x, y);
  const OperatorPlan left = build_plan(k, g, Side::Left, order);
  const OperatorPlan right = build_plan(k, g, Side::Right, order);
  Table t = to_table(x, "x");
  append_columns(t, y, "y");
  append_columns(t, left.apply(y), "left_y");
  append_columns(t, right.apply(x), "right_x");
  return {t, json{{"duality_residual", res}, {"order", order}, {"tail_estimate", left.tail_estimate()}}};
}

TaskOutput op_ibp(const Context& ctx) {
  const Obj o = ctx.root.sub("operator");
  const AnalyticKernel k = ctx.kernel();
  const Grid g = ctx.grid();
  const SampledFn x = sampled(ctx, o, "function", g);
  const SampledFn y = sampled(ctx, o, "partner", g);
  require_cols(x, 1, "operator.function");
  require_cols(y, 1, "operator.partner");
  const double res = ibp_residual(k, g, x, y);
  Table t = to_table(x, "x");
  append_columns(t, y, "y");
  append_columns(t, caputo_derivative(k, g, Side::Left, y), "caputo_y");
  return {t, json{{"ibp_residual", res}}};
}

TaskOutput op_gronwall(const Context& ctx) {
  const Obj o = ctx.root.sub("gronwall");
  const AnalyticKernel k = ctx.kernel();
  const Grid g = ctx.grid();
  const SampledFn a = sampled(ctx, o, "a_expr", g);
  const SampledFn gg = sampled(ctx, o, "g_expr", g);
  require_cols(a, 1, "gronwall.a_expr");
  require_cols(gg, 1, "gronwall.g_expr");
  const GronwallResult r =
      gronwall_bound(k, g, a, gg, o.count("k_max", 30), parse_family(o.str("family", "gamma")));
  Table t = to_table(r.bound, "bound");
  json rep{{"terms", r.terms},
           {"tail_estimate", r.tail_estimate},
           {"semigroup", semigroup_json(r.semigroup)},
           {"semigroup_warning", r.semigroup_warning}};
  if (has_sampled(o, "u_expr")) {
    const SampledFn u = sampled(ctx, o, "u_expr", g);
    require_cols(u, 1, "gronwall.u_expr");
    append_columns(t, u, "u");
    rep["verified"] = verify_gronwall(u, r.bound, ctx.tol(1e-9));
  }
  return {t, rep};
}

// ---- kernel ----

TaskOutput kernel_dual(const Context& ctx) {
  const AnalyticKernel k = ctx.kernel();
  std::optional<std::size_t> terms;
  if (ctx.root.has("dual")) terms = ctx.root.sub("dual").count("n_terms", k.size() - 1);
  const AnalyticKernel d = dual_kernel(k, terms);
  const ConvolutionResidual cr = convolution_residual(k, d);
  const Index rows = static_cast<Index>(d.size());
  Table t{{"n", "a", "abar", "residual"}, Eigen::MatrixXd(rows, 4)};
  for (Index i = 0; i < rows; ++i) {
    const auto n = static_cast<std::size_t>(i);
    t.values.row(i) << static_cast<double>(n), k.coeff(n), d.coeff(n), cr.absolute[n];
  }
  json rep{{"coeffs", std::vector<double>(k.coeffs().begin(), k.coeffs().end())},
           {"dual_coeffs", std::vector<double>(d.coeffs().begin(), d.coeffs().end())},
           {"max_residual", *std::max_element(cr.absolute.begin(), cr.absolute.end())},
           {"max_scaled_residual", *std::max_element(cr.scaled.begin(), cr.scaled.end())}};
  if (ctx.root.has("interval")) {
    const auto [a, b] = ctx.interval();
    k.check_interval(b - a);
    rep["tail_bound"] = series_tail_bound(k, k.size() - 1, b - a);
  }
  return {t, rep};
}

TaskOutput kernel_semigroup(const Context& ctx) {
  const AnalyticKernel k = ctx.kernel();
  static const json empty = json::object();
  const Obj s = ctx.root.has("semigroup") ? ctx.root.sub("semigroup") : Obj{empty, "problem.semigroup"};
  const std::string fam = s.str("family", "gamma");
  const CoefficientFamily family = fam == "gamma"   ? gamma_family(k)
                                   : fam == "fixed" ? fixed_family(k)
                                                    : throw ValidationError("semigroup.family must be gamma or fixed");
  const std::string idx = s.str("indexing", "as_printed");
  SemigroupIndexing indexing = SemigroupIndexing::AsPrinted;
  if (idx == "symmetric") indexing = SemigroupIndexing::Symmetric;
  else if (idx != "as_printed") throw ValidationError("semigroup.indexing must be as_printed or symmetric");
  const SemigroupReport r = semigroup_check(family, s.num("alpha1", k.alpha()), s.num("alpha2", k.alpha()), k.beta(),
                                            s.count("k_max", 32), ctx.tol(s.num("tol", 1e-10)), indexing);
  Table t{{"k", "residual"}, Eigen::MatrixXd(static_cast<Index>(r.residuals.size()), 2)};
  for (std::size_t i = 0; i < r.residuals.size(); ++i)
    t.values.row(static_cast<Index>(i)) << static_cast<double>(i), r.residuals[i];
  return {t, semigroup_json(r)};
}

// ---- solvers and checks ----

ControlSystem control_system(const Context& ctx, const Obj& o, std::size_t m) {
  return make_control_system(ctx.kernel(), ctx.grid(), o.strings("dynamics"), o.vec("x0"), m);
}

TaskOutput solve_fde_task(const Context& ctx) {
  const Obj o = ctx.root.sub("fde");
  const Grid g = ctx.grid();
  SampledFn u = has_sampled(o, "control") ? sampled(ctx, o, "control", g) : SampledFn::zeros(g, 0);
  const ControlSystem sys = control_system(ctx, o, static_cast<std::size_t>(u.cols()));
  const ForwardResult fr = solve_forward(sys, u, ctx.tol(o.num("tol", 1e-12)), o.count("max_iter", 200));
  Table t = to_table(fr.x, "x");
  append_columns(t, u, "u");
  json rep{{"residual", fr.residual}, {"max_inner_iter", fr.max_inner_iter}};
  if (has_sampled(o, "variation")) {
    const SampledFn h = sampled(ctx, o, "variation", g);
    require_cols(h, sys.n_controls, "fde.variation");
    append_columns(t, solve_variational(sys, fr.x, u, h), "eta");
  }
  return {t, rep};
}

TaskOutput solve_ocp_task(const Context& ctx) {
  const Obj o = ctx.root.sub("ocp");
  const Grid g = ctx.grid();
  const std::size_t m = o.count("controls", 1);
  OCProblem p = make_oc_problem(control_system(ctx, o, m), o.str("lagrangian"));
  SampledFn u0 = SampledFn::zeros(g, static_cast<Index>(m));
  if (o.has("solver")) {
    const Obj sv = o.sub("solver");
    if (has_sampled(sv, "u0")) u0 = sampled(ctx, sv, "u0", g);
  }
  require_cols(u0, m, "ocp.solver.u0");
  const SweepOptions opt = sweep_options(ctx, o, 1e-8);
  const SweepResult r = solve_ocp(p, u0, opt);
  if (!r.converged)
    throw NumericalError("sweep did not reach tol " + std::to_string(opt.tol) + " (opt_res = " +
                             std::to_string(r.history.back().opt_res) + ")",
                         std::nullopt, r.iterations);
  const Candidate& c = r.candidate;
  json hist = json::array();
  for (const auto& h : r.history) hist.push_back(json{{"J", h.J}, {"opt_res", h.opt_res}});
  json rep{{"converged", r.converged}, {"iterations", r.iterations}, {"J", r.history.back().J},
           {"opt_res", r.history.back().opt_res}, {"history", hist}, {"check", residual_json(check_pmp(p, c))}};
  return {trajectories(c.x, c.u, &c.lambda), rep};
}

TaskOutput check_pmp_task(const Context& ctx) {
  const Obj o = ctx.root.sub("candidate");
  const Grid g = ctx.grid();
  const SampledFn u = sampled(ctx, o, "u", g);
  const OCProblem p = make_oc_problem(control_system(ctx, o, static_cast<std::size_t>(u.cols())), o.str("lagrangian"));
  const std::size_t n = p.system.n_states();
  const SampledFn x = sampled(ctx, o, "x", g);
  require_cols(x, n, "candidate.x");
  const SampledFn lambda = has_sampled(o, "lambda") ? sampled(ctx, o, "lambda", g) : SampledFn::zeros(g, static_cast<Index>(n));
  require_cols(lambda, n, "candidate.lambda");
  const double l0 = o.num("lambda0", 1.0);
  const Candidate c{x, u, lambda, l0};
  const ResidualReport r = check_pmp(p, c);
  const EndpointWeight w(p.system.kernel, g);
  Table t = trajectories(x, u, &lambda);
  append_columns(t, SampledFn(g, hamiltonian_gradient_u(p, w, x, u, l0, lambda)), "grad_u");
  return {t, residual_json(r)};
}

TaskOutput check_el_task(const Context& ctx) {
  const Obj o = ctx.root.sub("cov");
  const Grid g = ctx.grid();
  const CoVProblem p = make_cov_problem(ctx.kernel(), g, o.str("lagrangian"), o.vec("xa"), o.vec("xb"));
  const SampledFn x = sampled(ctx, o, "x", g);
  require_cols(x, p.n(), "cov.x");
  const SampledFn el = el_residual(p, x);
  const SampledFn red = pmp_reduction_residual(p, x);
  const Index last = static_cast<Index>(g.n());
  constexpr Index layer = 3;
  const double interior = last > 2 * layer ? sup(el.values().middleRows(layer, last - 2 * layer + 1)) : 0.0;
  Table t = to_table(x, "x");
  append_columns(t, el, "el");
  append_columns(t, red, "pmp");
  return {t, json{{"el_res", sup(el.values())},
                  {"el_res_interior", interior},
                  {"reduction_gap", sup(el.values() - red.values())}}};
}

TaskOutput solve_iso_task(const Context& ctx) {
  const Obj o = ctx.root.sub("iso");
  const Grid g = ctx.grid();
  CoVProblem base = make_cov_problem(ctx.kernel(), g, o.str("lagrangian"), o.vec("xa"), o.vec("xb"));
  const IsoProblem p = make_iso_problem(std::move(base), o.str("constraint"), o.num("l"));
  const Eigen::VectorXd br = o.vec("bracket");
  if (br.size() != 2) throw ValidationError("iso.bracket must hold two numbers");
  IsoOptions opt;
  opt.tol = ctx.tol(o.num("tol", opt.tol));
  opt.max_outer = o.count("max_outer", opt.max_outer);
  opt.max_newton = o.count("max_newton", opt.max_newton);
  opt.sweep = sweep_options(ctx, o, 1e-9);
  const IsoResult r = solve_isoperimetric(p, {br(0), br(1)}, opt);
  json rep{{"lambda", r.lambda},
           {"defect", r.defect},
           {"boundary_defect", r.boundary_defect},
           {"opt_res", r.opt_res},
           {"el_res", r.el_res},
           {"lambda_rl_res", r.lambda_rl_res},
           {"degenerate", r.degenerate},
           {"nu", std::vector<double>(r.nu.data(), r.nu.data() + r.nu.size())},
           {"outer_iterations", r.outer_iterations}};
  return {trajectories(r.x, r.u, nullptr), rep};
}

using Handler = std::function<TaskOutput(const Context&)>;

struct Command {
  const char* name;
  const char* section;  // nullptr: no task section
  Handler run;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> table{
      {"op apply", "operator", op_apply},
      {"op check-duality", "operator", op_duality},
      {"op check-ibp", "operator", op_ibp},
      {"op gronwall", "gronwall", op_gronwall},
      {"kernel dual", nullptr, kernel_dual},
      {"kernel semigroup", "semigroup", kernel_semigroup},
      {"solve fde", "fde", solve_fde_task},
      {"solve ocp", "ocp", solve_ocp_task},
      {"solve iso", "iso", solve_iso_task},
      {"check pmp", "candidate", check_pmp_task},
      {"check el", "cov", check_el_task},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& task_commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : commands()) v.emplace_back(c.name);
    return v;
  }();
  return names;
}

TaskOutput run_task(const std::string& command, const json& problem, const fs::path& base_dir,
                    const TaskOverrides& overrides) {
  const auto it = std::find_if(commands().begin(), commands().end(),
                               [&](const Command& c) { return command == c.name; });
  if (it == commands().end()) throw ValidationError("unknown command '" + command + "'");
  if (!problem.is_object()) throw ValidationError("problem file must hold a JSON object");
  if (overrides.grid_n && *overrides.grid_n == 0) throw ValidationError("grid override must be positive");
  if (overrides.tol && !(*overrides.tol > 0.0)) throw ValidationError("tolerance override must be positive");

  std::vector<std::string> present;
  for (const char* s : kSections)
    if (problem.contains(s)) present.emplace_back(s);
  if (present.size() > 1) throw ValidationError("problem file holds more than one task section");
  // The semigroup section is optional: every field has a default.
  const bool optional_section = it->section == nullptr || std::string(it->section) == "semigroup";
  if (!optional_section && present.empty())
    throw ValidationError("command '" + command + "' needs a '" + it->section + "' section");
  if (!present.empty() && (it->section == nullptr || present[0] != it->section))
    throw ValidationError("section '" + present[0] + "' does not belong to command '" + command + "'");

  const Context ctx{Obj{problem, "problem"}, base_dir, overrides};
  try {
    return it->run(ctx);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("problem file: ") + e.what());
  }
}

}  // namespace akfrac

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

#include "akfrac.h"

#include <cmath>
#include <ctime>
#include <filesystem>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "akfrac/error.hpp"
#include "akfrac/expr.hpp"
#include "akfrac/fracops.hpp"
#include "akfrac/io.hpp"
#include "akfrac/kernel.hpp"
#include "akfrac/task.hpp"
#include "json.hpp"

#ifndef AKF_VERSION_STRING
#define AKF_VERSION_STRING "0.0.0"
#endif

struct akf_kernel {
  akfrac::AnalyticKernel k;
};

struct akf_plan {
  akfrac::OperatorPlan p;
};

struct akf_expr {
  akfrac::Expr e;
};

namespace {

using json = nlohmann::json;

thread_local std::string g_message;
thread_local std::string g_json;

void clear_error() {
  g_message.clear();
  g_json.clear();
}

akf_status record(akf_status status, const std::string& message, const char* kind,
                  std::optional<std::size_t> node = std::nullopt, std::optional<std::size_t> iteration = std::nullopt) {
  g_message = message;
  json j{{"error", kind}, {"exit_code", static_cast<int>(status)}, {"message", message}};
  if (node) j["node"] = *node;
  if (iteration) j["iteration"] = *iteration;
  g_json = j.dump();
  return status;
}

// Maps the current exception to a status and records it.
akf_status translate() {
  try {
    throw;
  } catch (const akfrac::NumericalError& e) {
    return record(AKF_NUMERICAL, e.what(), "numerical", e.node(), e.iteration());
  } catch (const akfrac::ValidationError& e) {
    return record(AKF_VALIDATION, e.what(), "validation");
  } catch (const akfrac::IoError& e) {
    return record(AKF_IO, e.what(), "io");
  } catch (const std::bad_alloc&) {
    return record(AKF_INTERNAL, "out of memory", "internal");
  } catch (const std::exception& e) {
    return record(AKF_INTERNAL, e.what(), "internal");
  } catch (...) {
    return record(AKF_INTERNAL, "unknown exception", "internal");
  }
}

template <class F>
akf_status guarded(F&& f) {
  clear_error();
  try {
    f();
    return AKF_OK;
  } catch (...) {
    return translate();
  }
}

void need(const void* p, const char* what) {
  if (!p) throw akfrac::ValidationError(std::string(what) + " must not be null");
}

void copy_out(const std::vector<double>& v, double* out, std::size_t cap, std::size_t* len) {
  need(len, "len");
  if (cap > 0) need(out, "out");
  *len = v.size();
  for (std::size_t i = 0; i < v.size() && i < cap; ++i) out[i] = v[i];
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json metadata(const std::string& command, const std::string& problem) {
  return json{{"command", command}, {"problem", problem}, {"timestamp", utc_timestamp()}, {"version", AKF_VERSION_STRING}};
}

}  // namespace

extern "C" {

const char* akf_version(void) { return AKF_VERSION_STRING; }
const char* akf_last_error(void) { return g_message.c_str(); }
const char* akf_last_error_json(void) { return g_json.c_str(); }

akf_status akf_kernel_create(const double* coeffs, size_t n_coeffs, double alpha, double beta, double radius,
                             akf_kernel** out) {
  return guarded([&] {
    need(out, "out");
    if (n_coeffs > 0) need(coeffs, "coeffs");
    *out = new akf_kernel{akfrac::make_kernel(std::vector<double>(coeffs, coeffs + n_coeffs), alpha, beta, radius)};
  });
}

akf_status akf_kernel_named(const char* name, double alpha, double beta, double radius, size_t truncation,
                            akf_kernel** out) {
  return guarded([&] {
    need(out, "out");
    need(name, "name");
    *out = new akf_kernel{akfrac::make_named_kernel(name, alpha, beta, radius, truncation)};
  });
}

void akf_kernel_free(akf_kernel* k) { delete k; }

akf_status akf_kernel_coefficients(const akf_kernel* k, double* out, size_t cap, size_t* len) {
  return guarded([&] {
    need(k, "kernel");
    copy_out(std::vector<double>(k->k.coeffs().begin(), k->k.coeffs().end()), out, cap, len);
  });
}

akf_status akf_kernel_dual(const akf_kernel* k, size_t n_terms, akf_kernel** out) {
  return guarded([&] {
    need(k, "kernel");
    need(out, "out");
    std::optional<std::size_t> terms;
    if (n_terms > 0) terms = n_terms;
    *out = new akf_kernel{akfrac::dual_kernel(k->k, terms)};
  });
}

akf_status akf_kernel_gamma_transform(const akf_kernel* k, double sigma, double* out, size_t cap, size_t* len) {
  return guarded([&] {
    need(k, "kernel");
    copy_out(akfrac::gamma_transform(k->k, sigma).terms, out, cap, len);
  });
}

akf_status akf_kernel_tail_bound(const akf_kernel* k, size_t n_trunc, double length, double* out) {
  return guarded([&] {
    need(k, "kernel");
    need(out, "out");
    *out = akfrac::series_tail_bound(k->k, n_trunc, length);
  });
}

akf_status akf_plan_build(const akf_kernel* k, double a, double b, size_t n, akf_side side, double order,
                          akf_plan** out) {
  return guarded([&] {
    need(k, "kernel");
    need(out, "out");
    if (side != AKF_LEFT && side != AKF_RIGHT) throw akfrac::ValidationError("side must be AKF_LEFT or AKF_RIGHT");
    const akfrac::Side s = side == AKF_LEFT ? akfrac::Side::Left : akfrac::Side::Right;
    const akfrac::Grid g(a, b, n);
    *out = new akf_plan{std::isnan(order) ? akfrac::build_plan(k->k, g, s) : akfrac::build_plan(k->k, g, s, order)};
  });
}

akf_status akf_plan_apply(const akf_plan* p, const double* x, size_t len, double* y) {
  return guarded([&] {
    need(p, "plan");
    need(x, "x");
    need(y, "y");
    if (len != p->p.grid().size())
      throw akfrac::ValidationError("plan expects " + std::to_string(p->p.grid().size()) + " samples");
    const auto rows = static_cast<Eigen::Index>(len);
    const Eigen::MatrixXd r = p->p.apply(Eigen::Map<const Eigen::MatrixXd>(x, rows, 1));
    Eigen::Map<Eigen::VectorXd>(y, rows) = r.col(0);
  });
}

akf_status akf_plan_tail_estimate(const akf_plan* p, double* out) {
  return guarded([&] {
    need(p, "plan");
    need(out, "out");
    *out = p->p.tail_estimate();
  });
}

void akf_plan_free(akf_plan* p) { delete p; }

akf_status akf_expr_parse(const char* src, size_t n_states, size_t n_controls, akf_expr** out) {
  return guarded([&] {
    need(src, "src");
    need(out, "out");
    *out = new akf_expr{akfrac::Expr::parse(src, akfrac::Dims{n_states, n_controls, 0, 0})};
  });
}

akf_status akf_expr_eval(const akf_expr* e, const double* env, size_t len, double* out) {
  return guarded([&] {
    need(e, "expr");
    need(env, "env");
    need(out, "out");
    if (len != e->e.dims().size()) throw akfrac::ValidationError("environment length does not match the expression");
    *out = e->e.eval(std::span<const double>(env, len));
  });
}

akf_status akf_expr_gradient(const akf_expr* e, const double* env, size_t len, double* value, double* grad) {
  return guarded([&] {
    need(e, "expr");
    need(env, "env");
    need(value, "value");
    if (len != e->e.dims().size()) throw akfrac::ValidationError("environment length does not match the expression");
    if (len > 1) need(grad, "grad");
    std::vector<std::size_t> wrt(len - 1);
    for (std::size_t i = 0; i < wrt.size(); ++i) wrt[i] = i + 1;
    *value = e->e.gradient(std::span<const double>(env, len), wrt, std::span<double>(grad, len - 1));
  });
}

void akf_expr_free(akf_expr* e) { delete e; }

akf_status akf_run_task(const char* command, const char* problem_path, const char* out_dir,
                        const akf_run_options* options) {
  namespace fs = std::filesystem;
  std::optional<fs::path> report_path;
  std::string cmd;
  std::string problem;
  const akf_status st = guarded([&] {
    need(command, "command");
    need(problem_path, "problem_path");
    need(out_dir, "out_dir");
    cmd = command;
    problem = problem_path;
    akfrac::TaskOverrides ov;
    if (options) {
      if (options->grid_n > 0) ov.grid_n = options->grid_n;
      if (options->tol > 0.0) ov.tol = options->tol;
    }
    const fs::path pp(problem_path);
    const json doc = akfrac::read_json(pp);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw akfrac::IoError("cannot create output directory " + std::string(out_dir));
    report_path = fs::path(out_dir) / "report.json";

    akfrac::TaskOutput res = akfrac::run_task(cmd, doc, pp.parent_path(), ov);
    res.report["status"] = "ok";
    res.report["metadata"] = metadata(cmd, problem);
    akfrac::write_csv(fs::path(out_dir) / "result.csv", res.result);
    akfrac::write_json(*report_path, res.report);
  });
  if (st == AKF_NUMERICAL && report_path) {
    // The failure report names the node or iteration; a write error here
    // must not mask the original status.
    try {
      json rep{{"status", "failed"}, {"error", json::parse(g_json)}, {"metadata", metadata(cmd, problem)}};
      akfrac::write_json(*report_path, rep);
    } catch (...) {
    }
  }
  return st;
}

}  // extern "C"

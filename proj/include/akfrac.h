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

/* C interface to the akfrac library. All handles are opaque; every function
 * that can fail returns an akf_status and leaves details in akf_last_error(),
 * which is per thread and valid until the next failing call on that thread.
 */
#ifndef AKFRAC_H
#define AKFRAC_H

#include <stddef.h>

#if defined(_WIN32)
#define AKF_API __declspec(dllexport)
#else
#define AKF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum akf_status {
  AKF_OK = 0,
  AKF_VALIDATION = 1, /* bad input: dimensions, domains, malformed files */
  AKF_NUMERICAL = 2,  /* non-convergence, singular systems, overflow */
  AKF_IO = 3,         /* unreadable or unwritable files */
  AKF_INTERNAL = 4
} akf_status;

typedef enum akf_side { AKF_LEFT = 0, AKF_RIGHT = 1 } akf_side;

typedef struct akf_kernel akf_kernel;
typedef struct akf_plan akf_plan;
typedef struct akf_expr akf_expr;

AKF_API const char* akf_version(void);
AKF_API const char* akf_last_error(void);
/* The last error as one line of JSON: {"error", "exit_code", "message"} plus
 * "node" and "iteration" when known. Empty string after a success. */
AKF_API const char* akf_last_error_json(void);

/* ---- kernels ---- */

/* radius may be INFINITY. */
AKF_API akf_status akf_kernel_create(const double* coeffs, size_t n_coeffs, double alpha, double beta,
                                     double radius, akf_kernel** out);
/* name: "rl" or "exp"; truncation is the last kept index for "exp". */
AKF_API akf_status akf_kernel_named(const char* name, double alpha, double beta, double radius,
                                    size_t truncation, akf_kernel** out);
AKF_API void akf_kernel_free(akf_kernel* k);

/* Copies up to cap coefficients; *len receives the full count. */
AKF_API akf_status akf_kernel_coefficients(const akf_kernel* k, double* out, size_t cap, size_t* len);
/* n_terms = 0 keeps the source kernel's length. */
AKF_API akf_status akf_kernel_dual(const akf_kernel* k, size_t n_terms, akf_kernel** out);
/* a_n Gamma(beta n + sigma); same copy convention as akf_kernel_coefficients. */
AKF_API akf_status akf_kernel_gamma_transform(const akf_kernel* k, double sigma, double* out, size_t cap,
                                              size_t* len);
AKF_API akf_status akf_kernel_tail_bound(const akf_kernel* k, size_t n_trunc, double length, double* out);

/* ---- operator plans on the uniform grid a..b with n cells ---- */

/* order NAN means the kernel's alpha. */
AKF_API akf_status akf_plan_build(const akf_kernel* k, double a, double b, size_t n, akf_side side, double order,
                                  akf_plan** out);
/* x and y hold n + 1 samples; y may not alias x. */
AKF_API akf_status akf_plan_apply(const akf_plan* p, const double* x, size_t len, double* y);
AKF_API akf_status akf_plan_tail_estimate(const akf_plan* p, double* out);
AKF_API void akf_plan_free(akf_plan* p);

/* ---- expressions over t, x1..xn, u1..um ---- */

AKF_API akf_status akf_expr_parse(const char* src, size_t n_states, size_t n_controls, akf_expr** out);
/* env = (t, x1..xn, u1..um), len = 1 + n + m. */
AKF_API akf_status akf_expr_eval(const akf_expr* e, const double* env, size_t len, double* out);
/* Value and exact derivatives with respect to every slot but t (len - 1 of them). */
AKF_API akf_status akf_expr_gradient(const akf_expr* e, const double* env, size_t len, double* value,
                                     double* grad);
AKF_API void akf_expr_free(akf_expr* e);

/* ---- problem-file tasks ---- */

typedef struct akf_run_options {
  size_t grid_n; /* 0: use the file's grid.n */
  double tol;    /* <= 0: use the file's tolerances */
} akf_run_options;

/* Runs one command ("op apply", "solve ocp", ...) on a JSON problem file and
 * writes result.csv and report.json into out_dir (created if missing). A
 * numerical failure still writes report.json with the error. options may be
 * NULL. */
AKF_API akf_status akf_run_task(const char* command, const char* problem_path, const char* out_dir,
                                const akf_run_options* options);

#ifdef __cplusplus
}
#endif

#endif /* AKFRAC_H */

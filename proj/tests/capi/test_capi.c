/* Exercises the shared library through its C header only. */
#include "svlq/svlq.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                     \
  do {                                                                   \
    if (!(cond)) {                                                       \
      fprintf(stderr, "%s:%d: expectation failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                        \
    }                                                                    \
  } while (0)

#define EXPECT_OK(call)                                                                              \
  do {                                                                                               \
    svlq_status st_ = (call);                                                                        \
    if (st_ != SVLQ_OK) {                                                                            \
      fprintf(stderr, "%s:%d: %s returned %d: %s\n", __FILE__, __LINE__, #call, (int)st_, svlq_last_error()); \
      ++failures;                                                                                    \
    }                                                                                                \
  } while (0)

static void test_intro_solution(void) {
  const double node = 0.0, weight = 1.0;
  svlq_measure* mu = NULL;
  svlq_model* model = NULL;
  svlq_solution* sol = NULL;
  EXPECT_OK(svlq_measure_atomic(1, 1, 1, &node, &weight, &mu));
  EXPECT_OK(svlq_model_brownian_regulator(1.0, &model));
  EXPECT_OK(svlq_solve(mu, model, 10000, SVLQ_SCHEME_EXP_MIDPOINT, &sol));
  EXPECT(svlq_solution_steps(sol) == 10000);

  double g = 0.0, chi = 0.0, alpha = 0.0, value = 0.0;
  EXPECT_OK(svlq_solution_gamma(sol, 0, &g));
  EXPECT_OK(svlq_solution_chi(sol, 0, &chi));
  EXPECT(fabs(g - tanh(1.0)) <= 1e-6);
  EXPECT(fabs(chi - log(cosh(1.0))) <= 1e-5);

  const double y = 2.0;
  EXPECT_OK(svlq_solution_control(sol, 0.5, &y, &alpha));
  EXPECT(fabs(alpha + tanh(0.5) * 2.0) <= 1e-5);
  EXPECT_OK(svlq_solution_value(sol, 0.0, &y, &value));
  EXPECT(fabs(value - (4.0 * tanh(1.0) + log(cosh(1.0)))) <= 1e-5);

  EXPECT(svlq_solution_gamma(sol, 10001, &g) == SVLQ_ERR_ARGUMENT);
  EXPECT(svlq_solution_control(sol, 1.5, &y, &alpha) == SVLQ_ERR_VALIDATION);
  EXPECT(strcmp(svlq_last_invariant(), "time_domain") == 0);

  double mean = 0.0, se = 0.0;
  EXPECT_OK(svlq_simulate_cost(sol, SVLQ_CONTROL_ZERO, 20000, 200, 1, 1, &mean, &se));
  EXPECT(fabs(mean - 0.5) <= 3.0 * se + 1.0 / 400.0);
  EXPECT_OK(svlq_simulate_cost(sol, SVLQ_CONTROL_FEEDBACK, 20000, 200, 1, 1, &mean, &se));
  EXPECT(fabs(mean - chi) <= 3.0 * se + 1e-2);

  double mean4 = 0.0, se4 = 0.0;
  EXPECT_OK(svlq_simulate_cost(sol, SVLQ_CONTROL_FEEDBACK, 20000, 200, 1, 4, &mean4, &se4));
  EXPECT(mean4 == mean && se4 == se);

  svlq_solution_free(sol);
  svlq_model_free(model);
  svlq_measure_free(mu);
}

static void test_general_model(void) {
  /* Scalar model with every coefficient set and two atoms. */
  const double nodes[2] = {0.0, 2.0}, weights[2] = {1.0, 0.5};
  const double B = -0.2, C = 1.0, D = 0.1, F = 0.2, Q = 1.0, N = 1.0, L = 0.3;
  const double gamma_coeffs[2] = {1.0, -0.5};
  svlq_measure* mu = NULL;
  svlq_model* model = NULL;
  svlq_solution* euler = NULL;
  svlq_solution* mid = NULL;
  EXPECT_OK(svlq_measure_atomic(2, 1, 1, nodes, weights, &mu));
  EXPECT(svlq_measure_size(mu) == 2);
  EXPECT_OK(svlq_model_create(1, 1, 1, &B, &C, &D, &F, &Q, &N, &L, 1.0, &model));
  EXPECT_OK(svlq_model_set_curve(model, SVLQ_CURVE_GAMMA, 2, gamma_coeffs));
  EXPECT_OK(svlq_solve(mu, model, 2000, SVLQ_SCHEME_EXP_EULER, &euler));
  EXPECT_OK(svlq_solve(mu, model, 2000, SVLQ_SCHEME_EXP_MIDPOINT, &mid));

  double ge[4], gm[4];
  EXPECT_OK(svlq_solution_gamma(euler, 0, ge));
  EXPECT_OK(svlq_solution_gamma(mid, 0, gm));
  EXPECT(ge[1] == ge[2]);
  for (int i = 0; i < 4; ++i) EXPECT(fabs(ge[i] - gm[i]) <= 1e-3);

  svlq_solution_free(euler);
  svlq_solution_free(mid);
  svlq_model_free(model);
  svlq_measure_free(mu);
}

static void test_fractional_measures(void) {
  svlq_measure* coarse = NULL;
  svlq_measure* fine = NULL;
  EXPECT_OK(svlq_measure_fractional(0.3, 10, 2.0, &coarse));
  EXPECT_OK(svlq_measure_fractional(0.3, 40, 1.4, &fine));
  double node = 0.0, weight = 0.0, e_coarse = 0.0, e_fine = 0.0;
  EXPECT_OK(svlq_measure_atom(coarse, 0, &node, &weight));
  EXPECT(node > 0.0 && weight > 0.0);
  EXPECT(svlq_measure_atom(coarse, 10, &node, &weight) == SVLQ_ERR_ARGUMENT);
  EXPECT_OK(svlq_measure_l2_error_fractional(coarse, 0.3, 1.0, &e_coarse));
  EXPECT_OK(svlq_measure_l2_error_fractional(fine, 0.3, 1.0, &e_fine));
  EXPECT(e_fine < e_coarse);
  svlq_measure_free(coarse);
  svlq_measure_free(fine);

  svlq_measure* g = NULL;
  EXPECT_OK(svlq_measure_gamma(0.3, 1.0, 4, 2.0, &g));
  EXPECT_OK(svlq_measure_atom(g, 0, &node, &weight));
  EXPECT(node > 1.0);
  svlq_measure_free(g);
}

static void test_errors(void) {
  svlq_measure* mu = NULL;
  EXPECT(svlq_measure_fractional(0.7, 10, 2.0, &mu) == SVLQ_ERR_VALIDATION);
  EXPECT(strcmp(svlq_last_invariant(), "hurst_range") == 0);
  EXPECT(strlen(svlq_last_error()) > 0);
  EXPECT(mu == NULL);
  EXPECT(svlq_measure_fractional(0.3, 10, 2.0, NULL) == SVLQ_ERR_ARGUMENT);

  const double bad_node = -1.0, weight = 1.0;
  EXPECT(svlq_measure_atomic(1, 1, 1, &bad_node, &weight, &mu) == SVLQ_ERR_VALIDATION);

  const double z = 0.0, one = 1.0;
  svlq_model* model = NULL;
  EXPECT(svlq_model_create(1, 1, 1, &z, &one, &z, &z, &one, &z, &z, 1.0, &model) == SVLQ_ERR_VALIDATION);
  EXPECT(model == NULL);

  EXPECT(svlq_solve(NULL, NULL, 10, SVLQ_SCHEME_EXP_EULER, NULL) == SVLQ_ERR_ARGUMENT);
  /* Success clears the previous error. */
  EXPECT_OK(svlq_model_brownian_regulator(1.0, &model));
  EXPECT(strlen(svlq_last_error()) == 0);
  svlq_model_free(model);
  svlq_measure_free(NULL);
  svlq_model_free(NULL);
  svlq_solution_free(NULL);
}

static void test_run_config(void) {
  char dir[512], path[640], run_dir[1024];
  snprintf(dir, sizeof dir, "%s/svlq_capi_run", getenv("TMPDIR") ? getenv("TMPDIR") : "/tmp");
  snprintf(path, sizeof path, "%s.json", dir);
  FILE* f = fopen(path, "w");
  EXPECT(f != NULL);
  if (!f) return;
  fputs("{\"task\": \"riccati\", \"solver\": {\"steps\": 100}}", f);
  fclose(f);
  EXPECT_OK(svlq_run_config(path, dir, NULL, 0, run_dir, sizeof run_dir));
  EXPECT(strncmp(run_dir, dir, strlen(dir)) == 0);

  f = fopen(path, "w");
  fputs("{\"task\": \"riccati\", \"solverz\": {}}", f);
  fclose(f);
  EXPECT(svlq_run_config(path, dir, NULL, 0, NULL, 0) == SVLQ_ERR_VALIDATION);
  EXPECT(strcmp(svlq_last_invariant(), "config:solverz") == 0);
  EXPECT(svlq_run_config(NULL, dir, NULL, 0, NULL, 0) == SVLQ_ERR_ARGUMENT);
  remove(path);
}

int main(void) {
  EXPECT(svlq_version() != NULL && strlen(svlq_version()) > 0);
  test_intro_solution();
  test_general_model();
  test_fractional_measures();
  test_errors();
  test_run_config();
  if (failures) {
    fprintf(stderr, "%d C API expectation(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}

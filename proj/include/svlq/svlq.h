#ifndef SVLQ_SVLQ_H
#define SVLQ_SVLQ_H

/* C interface to the stochastic Volterra LQ solver.
 *
 * Every function returns an svlq_status. On failure the message and the name
 * of the violated invariant are available through svlq_last_error() and
 * svlq_last_invariant() on the calling thread until its next API call.
 * Matrices cross the boundary as row-major double arrays. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SVLQ_API __declspec(dllexport)
#elif defined(SVLQ_BUILDING_LIBRARY)
#define SVLQ_API __attribute__((visibility("default")))
#else
#define SVLQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum svlq_status {
  SVLQ_OK = 0,
  SVLQ_ERR_INTERNAL = 1,
  SVLQ_ERR_VALIDATION = 2,
  SVLQ_ERR_NUMERICAL = 3,
  SVLQ_ERR_ARGUMENT = 4
} svlq_status;

typedef enum svlq_scheme { SVLQ_SCHEME_EXP_EULER = 0, SVLQ_SCHEME_EXP_MIDPOINT = 1 } svlq_scheme;

typedef enum svlq_curve_slot { SVLQ_CURVE_BETA = 0, SVLQ_CURVE_GAMMA = 1, SVLQ_CURVE_G0 = 2 } svlq_curve_slot;

typedef enum svlq_control { SVLQ_CONTROL_ZERO = 0, SVLQ_CONTROL_FEEDBACK = 1 } svlq_control;

typedef struct svlq_measure svlq_measure;
typedef struct svlq_model svlq_model;
typedef struct svlq_solution svlq_solution;

SVLQ_API const char* svlq_version(void);
SVLQ_API const char* svlq_last_error(void);
SVLQ_API const char* svlq_last_invariant(void);

/* Measures. */
SVLQ_API svlq_status svlq_measure_fractional(double hurst, int n, double r, svlq_measure** out);
SVLQ_API svlq_status svlq_measure_gamma(double hurst, double damping, int n, double r, svlq_measure** out);
/* weights holds count blocks of rows x cols, each row-major. */
SVLQ_API svlq_status svlq_measure_atomic(size_t count, size_t rows, size_t cols, const double* nodes,
                                         const double* weights, svlq_measure** out);
SVLQ_API void svlq_measure_free(svlq_measure* m);
SVLQ_API size_t svlq_measure_size(const svlq_measure* m);
/* weight receives rows x cols doubles. */
SVLQ_API svlq_status svlq_measure_atom(const svlq_measure* m, size_t i, double* node, double* weight);
SVLQ_API svlq_status svlq_measure_l2_error_fractional(const svlq_measure* m, double hurst, double horizon,
                                                      double* out);

/* Models: d state, dn noise, dc control dimensions. B, D are dn x d; C, F are
 * dn x dc; Q is d x d; N is dc x dc; L has d entries. Curves default to zero. */
SVLQ_API svlq_status svlq_model_create(size_t d, size_t dn, size_t dc, const double* B, const double* C,
                                       const double* D, const double* F, const double* Q, const double* N,
                                       const double* L, double horizon, svlq_model** out);
SVLQ_API svlq_status svlq_model_brownian_regulator(double horizon, svlq_model** out);
/* Polynomial curve: coeffs is dim x terms row-major, column k multiplies t^k. */
SVLQ_API svlq_status svlq_model_set_curve(svlq_model* model, svlq_curve_slot slot, size_t terms,
                                          const double* coeffs);
SVLQ_API void svlq_model_free(svlq_model* m);

/* Riccati solve and the optimal feedback built from it. */
SVLQ_API svlq_status svlq_solve(const svlq_measure* measure, const svlq_model* model, size_t steps,
                                svlq_scheme scheme, svlq_solution** out);
SVLQ_API void svlq_solution_free(svlq_solution* s);
SVLQ_API size_t svlq_solution_steps(const svlq_solution* s);
/* Kernel block matrix at grid index k, (n d) x (n d) row-major. */
SVLQ_API svlq_status svlq_solution_gamma(const svlq_solution* s, size_t k, double* out);
SVLQ_API svlq_status svlq_solution_chi(const svlq_solution* s, size_t k, double* out);
/* y holds the stacked factors (n dn entries); alpha receives dc entries. */
SVLQ_API svlq_status svlq_solution_control(const svlq_solution* s, double t, const double* y, double* alpha);
SVLQ_API svlq_status svlq_solution_value(const svlq_solution* s, double t, const double* y, double* out);
SVLQ_API svlq_status svlq_simulate_cost(const svlq_solution* s, svlq_control control, size_t paths, size_t steps,
                                        uint64_t seed, unsigned threads, double* mean, double* se);

/* Runs a JSON config end to end. out_dir and seed may be NULL; threads 0
 * keeps the config value. The run directory is copied into run_dir
 * (truncated to run_dir_len) when run_dir is not NULL. A run whose artifacts
 * were written but whose checked property failed returns SVLQ_ERR_NUMERICAL. */
SVLQ_API svlq_status svlq_run_config(const char* config_path, const char* out_dir, const uint64_t* seed,
                                     unsigned threads, char* run_dir, size_t run_dir_len);

#ifdef __cplusplus
}
#endif

#endif

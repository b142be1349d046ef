#include "svlq/svlq.h"

#include "svlq/kernels.hpp"
#include "svlq/model.hpp"
#include "svlq/montecarlo.hpp"
#include "svlq/policy.hpp"
#include "svlq/riccati.hpp"
#include "svlq/runner.hpp"
#include "svlq/sim.hpp"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

struct svlq_measure {
  svlq::DiscreteMeasure measure;
};

struct svlq_model {
  svlq::ModelCoefficients model;
};

struct svlq_solution {
  svlq::DiscreteMeasure measure;
  svlq::ModelCoefficients model;
  std::shared_ptr<const svlq::RiccatiSolution> solution;
  std::unique_ptr<svlq::FeedbackPolicy> policy;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_invariant;

svlq_status fail(svlq_status code, std::string invariant, std::string msg) {
  g_invariant = std::move(invariant);
  g_error = std::move(msg);
  return code;
}

// Runs `f`, translating exceptions into status codes.
template <class F>
svlq_status guarded(F&& f) {
  g_error.clear();
  g_invariant.clear();
  try {
    return f();
  } catch (const svlq::ValidationError& e) {
    return fail(SVLQ_ERR_VALIDATION, e.invariant(), e.what());
  } catch (const svlq::NumericalError& e) {
    return fail(SVLQ_ERR_NUMERICAL, e.invariant(), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SVLQ_ERR_INTERNAL, "memory", "out of memory");
  } catch (const std::exception& e) {
    return fail(SVLQ_ERR_INTERNAL, "internal", e.what());
  } catch (...) {
    return fail(SVLQ_ERR_INTERNAL, "internal", "unknown error");
  }
}

svlq_status null_arg(const char* name) {
  return fail(SVLQ_ERR_ARGUMENT, "non_null_argument", std::string("argument '") + name + "' must not be NULL");
}

svlq::Mat row_major(const double* data, size_t rows, size_t cols) {
  svlq::Mat m(static_cast<svlq::Index>(rows), static_cast<svlq::Index>(cols));
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) m(static_cast<svlq::Index>(i), static_cast<svlq::Index>(j)) = data[i * cols + j];
  return m;
}

void to_row_major(const svlq::Mat& m, double* out) {
  for (svlq::Index i = 0; i < m.rows(); ++i)
    for (svlq::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

svlq::Vec factors(const svlq_solution* s, const double* y) {
  const svlq::Index len = static_cast<svlq::Index>(s->measure.size()) * s->model.noise_dim();
  return Eigen::Map<const svlq::Vec>(y, len);
}

}  // namespace

extern "C" {

const char* svlq_version(void) { return "1.0.0"; }
const char* svlq_last_error(void) { return g_error.c_str(); }
const char* svlq_last_invariant(void) { return g_invariant.c_str(); }

svlq_status svlq_measure_fractional(double hurst, int n, double r, svlq_measure** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new svlq_measure{svlq::fractional_atoms(hurst, n, r)};
    return SVLQ_OK;
  });
}

svlq_status svlq_measure_gamma(double hurst, double damping, int n, double r, svlq_measure** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new svlq_measure{svlq::gamma_atoms(hurst, damping, n, r)};
    return SVLQ_OK;
  });
}

svlq_status svlq_measure_atomic(size_t count, size_t rows, size_t cols, const double* nodes, const double* weights,
                                svlq_measure** out) {
  if (!out) return null_arg("out");
  if (!nodes) return null_arg("nodes");
  if (!weights) return null_arg("weights");
  return guarded([&] {
    std::vector<svlq::Atom> atoms;
    for (size_t i = 0; i < count; ++i) atoms.push_back({row_major(weights + i * rows * cols, rows, cols), nodes[i]});
    *out = new svlq_measure{svlq::DiscreteMeasure(std::move(atoms))};
    return SVLQ_OK;
  });
}

void svlq_measure_free(svlq_measure* m) { delete m; }

size_t svlq_measure_size(const svlq_measure* m) { return m ? m->measure.size() : 0; }

svlq_status svlq_measure_atom(const svlq_measure* m, size_t i, double* node, double* weight) {
  if (!m) return null_arg("measure");
  if (!node) return null_arg("node");
  if (!weight) return null_arg("weight");
  if (i >= m->measure.size()) return fail(SVLQ_ERR_ARGUMENT, "atom_index", "atom index out of range");
  *node = m->measure.node(i);
  to_row_major(m->measure.weight(i), weight);
  return SVLQ_OK;
}

svlq_status svlq_measure_l2_error_fractional(const svlq_measure* m, double hurst, double horizon, double* out) {
  if (!m) return null_arg("measure");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = svlq::kernel_l2_error(m->measure, svlq::KernelSpec::fractional(hurst), horizon);
    return SVLQ_OK;
  });
}

svlq_status svlq_model_create(size_t d, size_t dn, size_t dc, const double* B, const double* C, const double* D,
                              const double* F, const double* Q, const double* N, const double* L, double horizon,
                              svlq_model** out) {
  if (!out) return null_arg("out");
  const double* args[] = {B, C, D, F, Q, N, L};
  const char* names[] = {"B", "C", "D", "F", "Q", "N", "L"};
  for (int i = 0; i < 7; ++i)
    if (!args[i]) return null_arg(names[i]);
  return guarded([&] {
    svlq::ModelCoefficients m;
    m.B = row_major(B, dn, d);
    m.C = row_major(C, dn, dc);
    m.D = row_major(D, dn, d);
    m.F = row_major(F, dn, dc);
    m.Q = row_major(Q, d, d);
    m.N = row_major(N, dc, dc);
    m.L = row_major(L, d, 1).col(0);
    m.beta = svlq::Curve::zero(static_cast<svlq::Index>(dn));
    m.gamma = svlq::Curve::zero(static_cast<svlq::Index>(dn));
    m.g0 = svlq::Curve::zero(static_cast<svlq::Index>(d));
    m.horizon = horizon;
    m.validate();
    *out = new svlq_model{std::move(m)};
    return SVLQ_OK;
  });
}

svlq_status svlq_model_brownian_regulator(double horizon, svlq_model** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new svlq_model{svlq::brownian_regulator(horizon)};
    return SVLQ_OK;
  });
}

svlq_status svlq_model_set_curve(svlq_model* model, svlq_curve_slot slot, size_t terms, const double* coeffs) {
  if (!model) return null_arg("model");
  if (!coeffs) return null_arg("coeffs");
  return guarded([&] {
    svlq::ModelCoefficients& m = model->model;
    const size_t dim = static_cast<size_t>(slot == SVLQ_CURVE_G0 ? m.state_dim() : m.noise_dim());
    if (terms == 0) throw svlq::ValidationError("curve_terms", "a curve needs at least one coefficient");
    svlq::Curve c(row_major(coeffs, dim, terms));
    switch (slot) {
      case SVLQ_CURVE_BETA: m.beta = std::move(c); break;
      case SVLQ_CURVE_GAMMA: m.gamma = std::move(c); break;
      case SVLQ_CURVE_G0: m.g0 = std::move(c); break;
      default: throw svlq::ValidationError("curve_slot", "unknown curve slot");
    }
    return SVLQ_OK;
  });
}

void svlq_model_free(svlq_model* m) { delete m; }

svlq_status svlq_solve(const svlq_measure* measure, const svlq_model* model, size_t steps, svlq_scheme scheme,
                       svlq_solution** out) {
  if (!measure) return null_arg("measure");
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    svlq::RiccatiOptions opts;
    opts.steps = steps;
    opts.scheme = scheme == SVLQ_SCHEME_EXP_EULER ? svlq::Scheme::ExpEuler : svlq::Scheme::ExpMidpoint;
    auto s = std::make_unique<svlq_solution>();
    s->measure = measure->measure;
    s->model = model->model;
    s->solution = std::make_shared<const svlq::RiccatiSolution>(svlq::solve_backward(s->measure, s->model, opts));
    s->policy = std::make_unique<svlq::FeedbackPolicy>(s->solution, s->measure, s->model);
    *out = s.release();
    return SVLQ_OK;
  });
}

void svlq_solution_free(svlq_solution* s) { delete s; }

size_t svlq_solution_steps(const svlq_solution* s) { return s ? s->solution->steps() : 0; }

svlq_status svlq_solution_gamma(const svlq_solution* s, size_t k, double* out) {
  if (!s) return null_arg("solution");
  if (!out) return null_arg("out");
  if (k > s->solution->steps()) return fail(SVLQ_ERR_ARGUMENT, "grid_index", "grid index out of range");
  to_row_major(s->solution->gamma(k), out);
  return SVLQ_OK;
}

svlq_status svlq_solution_chi(const svlq_solution* s, size_t k, double* out) {
  if (!s) return null_arg("solution");
  if (!out) return null_arg("out");
  if (k > s->solution->steps()) return fail(SVLQ_ERR_ARGUMENT, "grid_index", "grid index out of range");
  *out = s->solution->chi(k);
  return SVLQ_OK;
}

svlq_status svlq_solution_control(const svlq_solution* s, double t, const double* y, double* alpha) {
  if (!s) return null_arg("solution");
  if (!y) return null_arg("y");
  if (!alpha) return null_arg("alpha");
  return guarded([&] {
    const svlq::Vec a = s->policy->control(t, factors(s, y));
    std::memcpy(alpha, a.data(), sizeof(double) * static_cast<size_t>(a.size()));
    return SVLQ_OK;
  });
}

svlq_status svlq_solution_value(const svlq_solution* s, double t, const double* y, double* out) {
  if (!s) return null_arg("solution");
  if (!y) return null_arg("y");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = s->policy->value(t, factors(s, y));
    return SVLQ_OK;
  });
}

svlq_status svlq_simulate_cost(const svlq_solution* s, svlq_control control, size_t paths, size_t steps,
                               uint64_t seed, unsigned threads, double* mean, double* se) {
  if (!s) return null_arg("solution");
  if (!mean) return null_arg("mean");
  if (!se) return null_arg("se");
  return guarded([&] {
    const svlq::LiftedSystem sys(s->measure, s->model);
    svlq::SimOptions o;
    o.paths = paths;
    o.steps = steps;
    o.seed = seed;
    o.threads = threads;
    const svlq::ControlLaw law =
        control == SVLQ_CONTROL_FEEDBACK ? svlq::ControlLaw::feedback(*s->policy) : svlq::ControlLaw::zero();
    const svlq::Estimate e = svlq::estimate_cost(svlq::simulate_lifted(sys, law, o));
    *mean = e.mean;
    *se = e.se;
    return SVLQ_OK;
  });
}

svlq_status svlq_run_config(const char* config_path, const char* out_dir, const uint64_t* seed, unsigned threads,
                            char* run_dir, size_t run_dir_len) {
  if (!config_path) return null_arg("config_path");
  return guarded([&] {
    svlq::RunRequest req;
    req.config_path = config_path;
    if (out_dir) req.out_dir = std::string(out_dir);
    if (seed) req.seed = *seed;
    if (threads) req.threads = threads;
    const svlq::RunResult res = svlq::run(req);
    if (run_dir && run_dir_len) {
      std::strncpy(run_dir, res.run_dir.c_str(), run_dir_len - 1);
      run_dir[run_dir_len - 1] = '\0';
    }
    if (res.failed_invariant)
      return fail(SVLQ_ERR_NUMERICAL, *res.failed_invariant,
                  "run finished but " + *res.failed_invariant + " did not hold; see " + res.run_dir);
    return SVLQ_OK;
  });
}

}  // extern "C"

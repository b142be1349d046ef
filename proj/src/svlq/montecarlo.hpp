#pragma once

#include "svlq/kernels.hpp"
#include "svlq/liftlq.hpp"
#include "svlq/policy.hpp"
#include "svlq/sim.hpp"

#include <vector>

namespace svlq {

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

// Sample mean and standard error. Throws ValidationError("paths_at_least_two")
// for fewer than two samples.
Estimate sample_estimate(const std::vector<double>& samples);

// Mean and standard error of the per-path cost int_0^T f(X, a) dt.
Estimate estimate_cost(const SimulationBatch& batch);

/// Monte Carlo check of J(a) - V_0 = E int (a - a*)' N^ (a - a*) dt for
/// a = a* + eps.
struct VerificationReport {
  double lhs = 0.0;  // J^(a) - chi_0
  double lhs_se = 0.0;
  double rhs = 0.0;  // estimated penalty
  double rhs_se = 0.0;
  double chi0 = 0.0;
  Estimate cost;
  bool pass = false;  // |lhs - rhs| <= 3 (lhs_se + rhs_se)
  bool rhs_nonnegative = false;
};

VerificationReport verify_identity(const LiftedSystem& system, const FeedbackPolicy& policy, const Curve& perturbation,
                                   const SimOptions& options);

// ||c||^2_{L2(0,T)} of a curve.
double curve_l2_sq(const Curve& c, double horizon);
// Left-Riemann estimates of E ||X||^2_{L2(0,T)} and E ||a||^2_{L2(0,T)}.
double state_l2_sq(const SimulationBatch& batch);
double control_l2_sq(const SimulationBatch& batch);

// m_T = ||g0||^2 + ||K||^2 (||beta||^2 + ||gamma||^2 + E||a||^2), all L2(0,T),
// the scale of the a priori bound on E ||X||^2_{L2}.
double apriori_scale(const ModelCoefficients& model, KernelView kernel, const SimulationBatch& batch);
// m_n = ||g0^n - g0||^2 + ||K^n - K||^2 (E||X||^2 + E||a||^2), the scale of
// the bound on E ||X^n - X||^2_{L2}.
double stability_scale(double g0_gap_sq, double kernel_gap, const SimulationBatch& batch);

}  // namespace svlq

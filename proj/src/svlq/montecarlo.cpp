#include "svlq/montecarlo.hpp"

#include "svlq/quadrature.hpp"

#include <cmath>

namespace svlq {

Estimate sample_estimate(const std::vector<double>& samples) {
  if (samples.size() < 2)
    throw ValidationError("paths_at_least_two", "a standard error needs at least two samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

Estimate estimate_cost(const SimulationBatch& batch) { return sample_estimate(batch.costs); }

VerificationReport verify_identity(const LiftedSystem& system, const FeedbackPolicy& policy, const Curve& perturbation,
                                   const SimOptions& options) {
  SimOptions opts = options;
  opts.penalty_reference = &policy;
  const SimulationBatch batch = simulate_lifted(system, ControlLaw::feedback(policy, perturbation), opts);
  VerificationReport r;
  r.chi0 = policy.solution().chi0();
  r.cost = estimate_cost(batch);
  r.lhs = r.cost.mean - r.chi0;
  r.lhs_se = r.cost.se;
  const Estimate pen = sample_estimate(batch.penalties);
  r.rhs = pen.mean;
  r.rhs_se = pen.se;
  r.pass = std::abs(r.lhs - r.rhs) <= 3.0 * (r.lhs_se + r.rhs_se);
  r.rhs_nonnegative = r.rhs >= 0.0;
  return r;
}

double curve_l2_sq(const Curve& c, double horizon) {
  if (!c.coeffs().size()) return 0.0;
  // Polynomials of degree <= 31 are integrated exactly per cell.
  const int cells = 1 + static_cast<int>(c.coeffs().cols() / 16);
  double s = 0.0;
  for (int i = 0; i < cells; ++i)
    s += quad::gauss_legendre16([&](double t) { return c(t).squaredNorm(); }, horizon * i / cells,
                                horizon * (i + 1) / cells);
  return s;
}

double state_l2_sq(const SimulationBatch& batch) {
  return batch.second_moment.head(static_cast<Index>(batch.steps)).sum() * batch.dt();
}

double control_l2_sq(const SimulationBatch& batch) {
  return batch.alpha_second_moment.head(static_cast<Index>(batch.steps)).sum() * batch.dt();
}

double apriori_scale(const ModelCoefficients& model, KernelView kernel, const SimulationBatch& batch) {
  const double T = model.horizon;
  const double k = kernel_l2_norm(kernel, T);
  return curve_l2_sq(model.g0, T) +
         k * k * (curve_l2_sq(model.beta, T) + curve_l2_sq(model.gamma, T) + control_l2_sq(batch));
}

double stability_scale(double g0_gap_sq, double kernel_gap, const SimulationBatch& batch) {
  return g0_gap_sq + kernel_gap * kernel_gap * (state_l2_sq(batch) + control_l2_sq(batch));
}

}  // namespace svlq

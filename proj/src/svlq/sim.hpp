#pragma once

#include "svlq/kernels.hpp"
#include "svlq/liftlq.hpp"
#include "svlq/policy.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace svlq {

/// Control applied during a simulation: a = feedback(t, Y) + curve(t).
struct ControlLaw {
  enum class Kind { Zero, OpenLoop, Feedback };
  Kind kind = Kind::Zero;
  Curve curve;  // open-loop control, or the perturbation added to the feedback
  const FeedbackPolicy* policy = nullptr;

  static ControlLaw zero() { return {}; }
  static ControlLaw open_loop(Curve c) { return {Kind::OpenLoop, std::move(c), nullptr}; }
  static ControlLaw feedback(const FeedbackPolicy& p, Curve perturbation = {}) {
    return {Kind::Feedback, std::move(perturbation), &p};
  }
};

struct SimOptions {
  std::size_t paths = 1000;
  std::size_t steps = 500;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t record_paths = 0;  // the first paths whose trajectories are kept
  // When set, each path also accumulates int (a - a*)' N^ (a - a*) dt with a*
  // the feedback of this policy.
  const FeedbackPolicy* penalty_reference = nullptr;
};

struct PathRecord {
  Mat x;      // (steps+1) x d
  Mat alpha;  // (steps+1) x m
  Mat y;      // (steps+1) x n d'; empty for the direct simulator
};

class SimulationBatch {
 public:
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  std::size_t steps = 0;
  double horizon = 0.0;
  Index factor_block = 0;  // d' for lifted batches
  std::vector<double> times;
  std::vector<double> costs;      // left-Riemann int f(X, a) dt per path
  std::vector<double> penalties;  // empty unless a penalty reference was given
  Mat mean_x;                     // (steps+1) x d
  Vec second_moment;              // E|X_t|^2 per grid time
  Vec fourth_moment;              // E|X_t|^4 per grid time
  Vec alpha_second_moment;        // E|a_t|^2 per grid time
  std::vector<PathRecord> records;

  double dt() const { return horizon / static_cast<double>(steps); }
  // Sample variance of X_t summed over components (trace of the covariance).
  double variance_x(std::size_t k) const;

  // Columns path, t, x_<r>..., alpha_<r>..., y_<i>_<r> for the selected
  // (0-based) factors.
  void write_paths_csv(const std::string& path, const std::vector<std::size_t>& factors = {}) const;
};

// Euler scheme of the lifted factor SDE:
//   Y^i <- exp(-theta_i dt) (Y^i + b~ dt + s~ dW).
SimulationBatch simulate_lifted(const LiftedSystem& system, const ControlLaw& law, const SimOptions& options);

// Left-point convolution Euler scheme of the Volterra equation with
// cell-averaged kernel weights. Uses the same Brownian increments as
// simulate_lifted for equal (seed, path). Only open-loop controls.
SimulationBatch simulate_direct_volterra(KernelView kernel, const ModelCoefficients& model, const ControlLaw& law,
                                         const SimOptions& options);

// Root-mean-square gap between matching recorded state paths, over all
// recorded paths and grid times.
double paired_rms_gap(const SimulationBatch& a, const SimulationBatch& b);

}  // namespace svlq

#include "svlq/runner.hpp"

#include "svlq/converge.hpp"
#include "svlq/csv.hpp"
#include "svlq/liftlq.hpp"
#include "svlq/montecarlo.hpp"
#include "svlq/policy.hpp"
#include "svlq/riccati.hpp"
#include "svlq/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <memory>

namespace svlq {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string utc_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::string unique_run_dir(const fs::path& base) {
  const std::string stamp = utc_stamp();
  fs::path dir = base / stamp;
  for (int k = 1; fs::exists(dir); ++k) dir = base / (stamp + "-" + std::to_string(k));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("writable_output", "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir.string();
}

std::string in_dir(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

void write_json(const std::string& path, const json& j) { csv::write_file(path, j.dump(2) + "\n"); }

json invariants_json(const InvariantReport& r) {
  return {{"max_asymmetry", r.max_asymmetry},
          {"min_lifted_eig", r.min_lifted_eig},
          {"lifted_scale", r.lifted_scale},
          {"min_nhat_excess_eig", r.min_nhat_excess_eig},
          {"row_sum_bound", r.row_sum_bound}};
}

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"se", e.se}}; }

SimOptions sim_options(const RunConfig& cfg) {
  SimOptions o;
  o.paths = cfg.simulation.paths;
  o.steps = cfg.simulation.steps;
  o.seed = cfg.simulation.seed;
  o.threads = cfg.threads;
  o.record_paths = cfg.simulation.record_paths;
  return o;
}

// Common Riccati output: summary fields plus riccati.csv and gains.csv.
json riccati_summary(const RiccatiSolution& sol, const FeedbackPolicy& policy, const RunConfig& cfg,
                     const std::string& dir) {
  sol.write_csv(in_dir(dir, "riccati.csv"), cfg.csv_stride);
  policy.write_gains_csv(in_dir(dir, "gains.csv"), cfg.csv_stride);
  return {{"gamma00_at_0", sol.gamma(0)(0, 0)},
          {"lambda0_at_0", sol.lambda(0)(0)},
          {"chi0", sol.chi0()},
          {"steps", sol.steps()},
          {"scheme", scheme_name(cfg.solver.scheme)},
          {"invariants", invariants_json(sol.invariants())}};
}

json kernel_summary(const KernelSpec& spec, const DiscreteMeasure& mu, double horizon) {
  json k{{"type", spec.name()}, {"atoms", mu.size()}, {"l2_norm_bound", l2_norm_bound(mu, horizon)}};
  if (!std::holds_alternative<AtomicKernel>(spec.variant())) k["l2_error"] = kernel_l2_error(mu, spec, horizon);
  return k;
}

json run_demo(const RunConfig& cfg, const KernelSpec& spec, const std::string& dir) {
  const DiscreteMeasure noise = build_measure(cfg, spec);
  const DiscreteMeasure mu = regulator_measure(noise);
  const double q = cfg.model.Q(0, 0);
  const double nw = cfg.model.N(0, 0);
  const ModelCoefficients model = regulator_model(q, nw, cfg.model.horizon);
  const LiftedSystem sys(mu, model);
  auto sol = std::make_shared<const RiccatiSolution>(solve_backward(mu, model, cfg.solver));
  const FeedbackPolicy policy(sol, mu, model);

  SimOptions opts = sim_options(cfg);
  opts.record_paths = std::max<std::size_t>(1, opts.record_paths);
  const SimulationBatch batch = simulate_lifted(sys, ControlLaw::feedback(policy), opts);

  // a* = -(1/N) [Gamma(0,0) X + sum_k (Gamma(theta_k,0) - Gamma(0,0)) c~_k Y2_k]
  const Index n = static_cast<Index>(mu.size());
  csv::Table table({"path", "t", "x", "alpha", "feedback_term", "memory_term"});
  double residual = 0.0;
  for (std::size_t p = 0; p < batch.records.size(); ++p) {
    const PathRecord& rec = batch.records[p];
    for (Index k = 0; k < rec.x.rows(); ++k) {
      const double t = batch.times[static_cast<std::size_t>(k)];
      const std::size_t j = policy.index(t);
      const Mat& G = sol->gamma(j);
      const double x = rec.x(k, 0);
      const double feedback = -G(0, 0) * x / nw;
      double memory = 0.0;
      for (Index i = 0; i < n; ++i) {
        const Mat& c = mu.weight(static_cast<std::size_t>(i));
        memory += (G(i, 0) - G(0, 0)) * c(0, 1) * rec.y(k, 2 * i + 1);
      }
      memory /= -nw;
      residual = std::max(residual, std::abs(rec.alpha(k, 0) - feedback - memory));
      table.add_row({std::to_string(p), csv::format_double(t), csv::format_double(x),
                     csv::format_double(rec.alpha(k, 0)), csv::format_double(feedback), csv::format_double(memory)});
    }
  }
  table.write(in_dir(dir, "paths.csv"));
  write_atoms_csv(mu, in_dir(dir, "atoms.csv"));
  json s = riccati_summary(*sol, policy, cfg, dir);
  s["kernel"] = kernel_summary(spec, noise, model.horizon);
  s["cost"] = estimate_json(estimate_cost(batch));
  s["decomposition_max_residual"] = residual;
  s["paths"] = batch.paths;
  s["sim_steps"] = batch.steps;
  return s;
}

}  // namespace

DiscreteMeasure build_measure(const RunConfig& cfg, const KernelSpec& spec) {
  const auto& v = spec.variant();
  if (auto a = std::get_if<AtomicKernel>(&v)) return DiscreteMeasure(a->atoms);
  if (!cfg.discretization.partition.empty()) return discretize(spec, cfg.discretization.partition);
  const int n = cfg.discretization.n;
  const double r = cfg.discretization.ratio;
  if (auto f = std::get_if<FractionalKernel>(&v)) return fractional_atoms(f->hurst, n, r);
  if (auto g = std::get_if<GammaKernel>(&v)) return gamma_atoms(g->hurst, g->damping, n, r);
  return discretize(spec, geometric_partition(n, r));
}

DiscreteMeasure regulator_measure(const DiscreteMeasure& noise) {
  if (noise.rows() != 1 || noise.cols() != 1)
    throw ValidationError("dimensions", "the regulator noise kernel must be scalar");
  Mat first(1, 2);
  first << 1.0, 0.0;
  std::vector<Atom> atoms{{first, 0.0}};
  for (const auto& a : noise.atoms()) {
    Mat w(1, 2);
    w << 0.0, a.weight(0, 0);
    atoms.push_back({w, a.node});
  }
  return DiscreteMeasure(std::move(atoms), noise.provenance());
}

ModelCoefficients regulator_model(double q, double n, double horizon) {
  ModelCoefficients m;
  m.B = Mat::Zero(2, 1);
  m.C = Mat::Zero(2, 1);
  m.C(0, 0) = 1.0;
  m.D = Mat::Zero(2, 1);
  m.F = Mat::Zero(2, 1);
  m.beta = Curve::zero(2);
  Vec g(2);
  g << 0.0, 1.0;
  m.gamma = Curve::constant(g);
  m.g0 = Curve::zero(1);
  m.Q = Mat::Constant(1, 1, q);
  m.N = Mat::Constant(1, 1, n);
  m.L = Vec::Zero(1);
  m.horizon = horizon;
  m.validate();
  return m;
}

RunResult execute(const RunConfig& cfg, const std::string& dir) {
  const KernelSpec spec = build_kernel(cfg);
  RunResult result;
  result.run_dir = dir;
  json s;
  s["task"] = task_name(cfg.task);

  if (cfg.task == Task::DemoRegulator) {
    s.update(run_demo(cfg, spec, dir));
  } else if (cfg.task == Task::Converge) {
    std::vector<SweepEntry> schedule = default_schedule(cfg.converge.ns);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      if (!cfg.converge.ratios.empty()) schedule[i].ratio = cfg.converge.ratios[i];
      if (cfg.converge.g0_shift == "inverse_n") schedule[i].g0_shift = 1.0 / schedule[i].n;
    }
    SweepOptions so;
    so.riccati = cfg.solver;
    so.threads = cfg.threads;
    so.reference_value = cfg.converge.reference_value;
    const SweepTable table = value_sweep(spec, cfg.model, schedule, so);
    table.write_csv(in_dir(dir, "sweep.csv"));
    json rows = json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"n", r.n},
                      {"r", r.ratio},
                      {"kernel_error", r.kernel_error},
                      {"g0_error", r.g0_error},
                      {"value", r.value},
                      {"value_error", r.value_error},
                      {"ratio", r.error_ratio}});
    s["rows"] = rows;
    s["reference"] = table.reference;
    s["reference_value"] = table.reference_value;
    try {
      const RateFit fit = fit_rate(table);
      s["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}, {"used_rows", fit.used_rows}};
    } catch (const ValidationError& e) {
      s["fit"] = nullptr;
      s["fit_skipped"] = e.invariant();
    }
  } else {
    const DiscreteMeasure mu = build_measure(cfg, spec);
    write_atoms_csv(mu, in_dir(dir, "atoms.csv"));
    const LiftedSystem sys(mu, cfg.model);
    auto sol = std::make_shared<const RiccatiSolution>(solve_backward(mu, cfg.model, cfg.solver));
    const FeedbackPolicy policy(sol, mu, cfg.model);
    s.update(riccati_summary(*sol, policy, cfg, dir));
    s["kernel"] = kernel_summary(spec, mu, cfg.model.horizon);
    const SimOptions opts = sim_options(cfg);

    if (cfg.task == Task::Value) {
      const SimulationBatch batch = simulate_lifted(sys, ControlLaw::feedback(policy), opts);
      const Estimate cost = estimate_cost(batch);
      s["cost"] = estimate_json(cost);
      s["cost_minus_chi0"] = cost.mean - sol->chi0();
      s["within_3se"] = std::abs(cost.mean - sol->chi0()) <= 3.0 * cost.se;
    } else if (cfg.task == Task::Simulate) {
      ControlLaw law;
      if (cfg.simulation.control == "feedback") law = ControlLaw::feedback(policy, cfg.simulation.perturbation);
      if (cfg.simulation.control == "open_loop") law = ControlLaw::open_loop(cfg.simulation.control_curve);
      const SimulationBatch batch = simulate_lifted(sys, law, opts);
      if (!batch.records.empty()) {
        std::vector<std::size_t> factors;
        for (std::size_t i = 0; i < std::min<std::size_t>(mu.size(), 3); ++i) factors.push_back(i);
        batch.write_paths_csv(in_dir(dir, "paths.csv"), factors);
      }
      const std::size_t M = batch.steps;
      s["control"] = cfg.simulation.control;
      s["cost"] = estimate_json(estimate_cost(batch));
      s["x_T_mean"] = batch.mean_x.row(static_cast<Index>(M)).norm();
      s["x_T_variance"] = batch.variance_x(M);
      s["max_fourth_moment"] = batch.fourth_moment.maxCoeff();
      s["apriori_scale"] = apriori_scale(cfg.model, spec, batch);
      if (!std::holds_alternative<AtomicKernel>(spec.variant()))
        s["stability_scale"] = stability_scale(0.0, kernel_l2_error(mu, spec, cfg.model.horizon), batch);
      s["paths"] = batch.paths;
      s["sim_steps"] = batch.steps;
    } else if (cfg.task == Task::Verify) {
      const VerificationReport r = verify_identity(sys, policy, cfg.simulation.perturbation, opts);
      s["lhs"] = r.lhs;
      s["lhs_se"] = r.lhs_se;
      s["rhs"] = r.rhs;
      s["rhs_se"] = r.rhs_se;
      s["pass"] = r.pass;
      s["rhs_nonnegative"] = r.rhs_nonnegative;
      s["cost"] = estimate_json(r.cost);
      if (!r.pass) result.failed_invariant = "verification_identity";
    }
  }
  result.summary = s;
  write_json(in_dir(dir, "summary.json"), s);
  return result;
}

RunResult run(const RunRequest& request) {
  RunConfig cfg = load_config(request.config_path);
  if (request.seed) cfg.simulation.seed = *request.seed;
  if (request.threads) {
    if (*request.threads == 0) throw ValidationError("threads_positive", "thread count must be at least 1");
    cfg.threads = *request.threads;
  }
  if (request.out_dir) {
    cfg.output_dir = *request.out_dir;
  } else if (const char* env = std::getenv("OUT_DIR"); env && *env) {
    cfg.output_dir = env;
  }
  const std::string dir = unique_run_dir(fs::path(cfg.output_dir) / task_name(cfg.task));
  write_json(in_dir(dir, "config.json"), resolved_json(cfg));
  return execute(cfg, dir);
}

}  // namespace svlq

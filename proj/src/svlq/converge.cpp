#include "svlq/converge.hpp"

#include "svlq/csv.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace svlq {

std::vector<SweepEntry> default_schedule(const std::vector<int>& ns) {
  std::vector<SweepEntry> out;
  for (int n : ns) out.push_back({n, 1.0 + 2.0 / std::sqrt(static_cast<double>(n)), 0.0});
  return out;
}

DiscreteMeasure sweep_measure(const KernelSpec& spec, int n, double ratio) {
  const auto& v = spec.variant();
  if (auto f = std::get_if<FractionalKernel>(&v)) return fractional_atoms(f->hurst, n, ratio);
  if (auto g = std::get_if<GammaKernel>(&v)) return gamma_atoms(g->hurst, g->damping, n, ratio);
  if (auto a = std::get_if<AtomicKernel>(&v)) return DiscreteMeasure(a->atoms);
  return discretize(spec, geometric_partition(n, ratio));
}

SweepTable value_sweep(const KernelSpec& spec, const ModelCoefficients& model, const std::vector<SweepEntry>& schedule,
                       const SweepOptions& options) {
  model.validate();
  if (schedule.empty()) throw ValidationError("schedule_nonempty", "sweep schedule is empty");
  if (options.threads == 0) throw ValidationError("threads_positive", "thread count must be at least 1");
  for (const auto& e : schedule) {
    if (e.n < 1) throw ValidationError("n_positive", "sweep entry has n = " + std::to_string(e.n));
    if (!(e.ratio > 1.0) || !std::isfinite(e.ratio))
      throw ValidationError("ratio_gt_one", "sweep entry n = " + std::to_string(e.n) + " has r <= 1");
    if (!std::isfinite(e.g0_shift)) throw ValidationError("finite_inputs", "g0 shift must be finite");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(model.Q, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw ValidationError("q_invertible", "the stability sweep requires Q positive definite");

  const double T = model.horizon;
  const Index d = model.state_dim();
  SweepTable table;
  table.rows.resize(schedule.size());
  std::vector<std::exception_ptr> errors(schedule.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < schedule.size();) {
      try {
        const SweepEntry& e = schedule[i];
        const DiscreteMeasure mu = sweep_measure(spec, e.n, e.ratio);
        ModelCoefficients mn = model;
        mn.g0 = model.g0.shifted(Vec::Constant(d, e.g0_shift));
        const RiccatiSolution sol = solve_backward(mu, mn, options.riccati);
        SweepRow& row = table.rows[i];
        row.n = e.n;
        row.ratio = e.ratio;
        row.kernel_error = kernel_l2_error(mu, spec, T);
        row.g0_error = std::abs(e.g0_shift) * std::sqrt(static_cast<double>(d) * T);
        row.value = sol.chi0();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(options.threads, schedule.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  if (options.reference_value) {
    table.reference_value = *options.reference_value;
    table.reference = "given";
  } else {
    std::size_t finest = 0;
    for (std::size_t i = 1; i < schedule.size(); ++i)
      if (schedule[i].n > schedule[finest].n) finest = i;
    table.reference_value = table.rows[finest].value;
    table.reference = "finest_row";
  }
  for (auto& row : table.rows) {
    row.value_error = std::abs(row.value - table.reference_value);
    const double input = row.kernel_error + row.g0_error;
    row.error_ratio = input > 0.0 ? row.value_error / input : std::numeric_limits<double>::quiet_NaN();
  }
  return table;
}

void SweepTable::write_csv(const std::string& path) const {
  csv::Table t({"n", "r", "kernel_error", "g0_error", "value", "value_error", "ratio"});
  for (const auto& r : rows)
    t.add_row({std::to_string(r.n), csv::format_double(r.ratio), csv::format_double(r.kernel_error),
               csv::format_double(r.g0_error), csv::format_double(r.value), csv::format_double(r.value_error),
               csv::format_double(r.error_ratio)});
  t.write(path);
}

RateFit fit_rate(const SweepTable& table) {
  if (table.rows.size() < 3)
    throw ValidationError("fit_rows", "rate fit needs at least three rows, got " + std::to_string(table.rows.size()));
  std::vector<double> xs, ys;
  for (const auto& r : table.rows) {
    const double input = r.kernel_error + r.g0_error;
    if (r.value_error > 0.0 && input > 0.0) {
      xs.push_back(std::log(input));
      ys.push_back(std::log(r.value_error));
    }
  }
  const std::size_t k = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  if (k < 2) throw ValidationError("degenerate_fit", "fewer than two rows with nonzero errors");
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("degenerate_fit", "all usable rows share the same input error");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  fit.used_rows = k;
  return fit;
}

}  // namespace svlq

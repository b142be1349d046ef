#include "svlq/sim.hpp"

#include "svlq/csv.hpp"
#include "svlq/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace svlq {

namespace {

// Paths are processed in fixed blocks so partial moment sums can be reduced
// in block order whatever the thread count.
constexpr std::size_t kBlock = 256;

// y += A x for a column-major rows x cols matrix.
inline void gemv_add(const double* a, Index rows, Index cols, const double* x, double* y) {
  for (Index c = 0; c < cols; ++c) {
    const double xc = x[c];
    const double* col = a + c * rows;
    for (Index r = 0; r < rows; ++r) y[r] += col[r] * xc;
  }
}

inline double quad_form(const double* a, Index n, const double* x) {
  double s = 0.0;
  for (Index c = 0; c < n; ++c) {
    double col = 0.0;
    for (Index r = 0; r < n; ++r) col += a[c * n + r] * x[r];
    s += x[c] * col;
  }
  return s;
}

void check_options(const SimOptions& o) {
  if (o.paths == 0) throw ValidationError("paths_positive", "simulation needs at least one path");
  if (o.steps == 0) throw ValidationError("steps_positive", "simulation needs at least one time step");
  if (o.threads == 0) throw ValidationError("threads_positive", "thread count must be at least 1");
}

void check_curve(const Curve& c, Index dim, const char* what) {
  if (!c.coeffs().size()) return;
  if (c.dim() != dim)
    throw ValidationError("dimensions", std::string(what) + " has dimension " + std::to_string(c.dim()) +
                                            ", expected " + std::to_string(dim));
}

// Per-block partial sums of the state moments.
struct MomentSums {
  Mat x;   // (steps+1) x d
  Vec s2;  // sum |X|^2
  Vec s4;  // sum |X|^4
  Vec a2;  // sum |a|^2

  MomentSums(std::size_t steps, Index d)
      : x(Mat::Zero(static_cast<Index>(steps + 1), d)),
        s2(Vec::Zero(static_cast<Index>(steps + 1))),
        s4(Vec::Zero(static_cast<Index>(steps + 1))),
        a2(Vec::Zero(static_cast<Index>(steps + 1))) {}

  void add(std::size_t k, const double* xv, Index d, const double* av, Index m) {
    const Index i = static_cast<Index>(k);
    double n2 = 0.0;
    for (Index r = 0; r < d; ++r) {
      x(i, r) += xv[r];
      n2 += xv[r] * xv[r];
    }
    s2(i) += n2;
    s4(i) += n2 * n2;
    double an = 0.0;
    for (Index r = 0; r < m; ++r) an += av[r] * av[r];
    a2(i) += an;
  }
};

SimulationBatch make_batch(const SimOptions& o, double horizon, Index d) {
  SimulationBatch b;
  b.seed = o.seed;
  b.paths = o.paths;
  b.steps = o.steps;
  b.horizon = horizon;
  b.times.resize(o.steps + 1);
  for (std::size_t k = 0; k <= o.steps; ++k)
    b.times[k] = horizon * static_cast<double>(k) / static_cast<double>(o.steps);
  b.costs.assign(o.paths, 0.0);
  b.mean_x = Mat::Zero(static_cast<Index>(o.steps + 1), d);
  b.second_moment = Vec::Zero(static_cast<Index>(o.steps + 1));
  b.fourth_moment = Vec::Zero(static_cast<Index>(o.steps + 1));
  b.alpha_second_moment = Vec::Zero(static_cast<Index>(o.steps + 1));
  b.records.resize(std::min(o.record_paths, o.paths));
  return b;
}

// Runs `path_fn(path, sums)` over all paths with a block-ordered reduction.
template <class PathFn>
void run_blocks(SimulationBatch& batch, const SimOptions& o, Index d, PathFn&& path_fn) {
  const std::size_t blocks = (o.paths + kBlock - 1) / kBlock;
  std::vector<MomentSums> sums(blocks, MomentSums(o.steps, d));
  std::vector<std::exception_ptr> errors(blocks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t blk; (blk = next.fetch_add(1)) < blocks;) {
      try {
        const std::size_t end = std::min(o.paths, (blk + 1) * kBlock);
        for (std::size_t p = blk * kBlock; p < end; ++p) path_fn(p, sums[blk]);
      } catch (...) {
        errors[blk] = std::current_exception();
      }
    }
  };
  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(o.threads, blocks));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& s : sums) {
    batch.mean_x += s.x;
    batch.second_moment += s.s2;
    batch.fourth_moment += s.s4;
    batch.alpha_second_moment += s.a2;
  }
  const double inv = 1.0 / static_cast<double>(o.paths);
  batch.mean_x *= inv;
  batch.second_moment *= inv;
  batch.fourth_moment *= inv;
  batch.alpha_second_moment *= inv;
}

[[noreturn]] void non_finite(std::size_t path, std::size_t step) {
  throw NumericalError("finite_paths", "simulated state became non-finite on path " + std::to_string(path) +
                                           " at step " + std::to_string(step));
}

// Curve evaluated on the grid, (steps+1) x dim, column-major per time: row k
// is stored contiguously.
std::vector<double> on_grid(const Curve& c, Index dim, const std::vector<double>& times) {
  std::vector<double> out(times.size() * static_cast<std::size_t>(dim), 0.0);
  if (!c.coeffs().size()) return out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Vec v = c(times[k]);
    std::copy(v.data(), v.data() + dim, out.begin() + static_cast<std::ptrdiff_t>(k * dim));
  }
  return out;
}

}  // namespace

double SimulationBatch::variance_x(std::size_t k) const {
  const Index i = static_cast<Index>(k);
  const double n = static_cast<double>(paths);
  const double biased = second_moment(i) - mean_x.row(i).squaredNorm();
  return paths > 1 ? biased * n / (n - 1.0) : biased;
}

SimulationBatch simulate_lifted(const LiftedSystem& system, const ControlLaw& law, const SimOptions& options) {
  check_options(options);
  const ModelCoefficients& md = system.model();
  const DiscreteMeasure& mu = system.measure();
  const Index n = static_cast<Index>(mu.size());
  const Index d = md.state_dim();
  const Index dp = md.noise_dim();
  const Index m = md.control_dim();
  const Index ndp = n * dp;
  check_curve(law.curve, m, "control curve");
  if (law.kind == ControlLaw::Kind::Feedback && !law.policy)
    throw ValidationError("policy_present", "feedback control needs a policy");
  for (const FeedbackPolicy* p : {law.policy, options.penalty_reference}) {
    if (!p) continue;
    if (p->measure().size() != mu.size() || p->model().state_dim() != d || p->model().control_dim() != m)
      throw ValidationError("dimensions", "policy does not match the lifted system");
    if (std::abs(p->solution().horizon() - md.horizon) > 1e-12 * md.horizon)
      throw ValidationError("horizon_match", "policy horizon differs from the model horizon");
  }

  SimulationBatch batch = make_batch(options, md.horizon, d);
  batch.factor_block = dp;
  const std::size_t M = options.steps;
  const double dt = batch.dt();
  const double sqdt = std::sqrt(dt);

  std::vector<double> decay(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) decay[static_cast<std::size_t>(i)] = std::exp(-mu.node(static_cast<std::size_t>(i)) * dt);
  const Mat W = system.stacked_weights();
  std::vector<double> g0(on_grid(md.g0, d, batch.times)), bt((M + 1) * dp), gt((M + 1) * dp);
  for (std::size_t k = 0; k <= M; ++k) {
    const Vec b = md.beta_tilde(batch.times[k]);
    const Vec g = md.gamma_tilde(batch.times[k]);
    std::copy(b.data(), b.data() + dp, bt.begin() + static_cast<std::ptrdiff_t>(k * dp));
    std::copy(g.data(), g.data() + dp, gt.begin() + static_cast<std::ptrdiff_t>(k * dp));
  }
  const std::vector<double> open =
      law.kind == ControlLaw::Kind::Zero ? std::vector<double>((M + 1) * m, 0.0) : on_grid(law.curve, m, batch.times);
  const bool feedback = law.kind == ControlLaw::Kind::Feedback;
  std::vector<std::size_t> pidx(M + 1, 0), ridx(M + 1, 0);
  for (std::size_t k = 0; k <= M; ++k) {
    if (feedback) pidx[k] = law.policy->index(batch.times[k]);
    if (options.penalty_reference) ridx[k] = options.penalty_reference->index(batch.times[k]);
  }
  const FeedbackPolicy* ref = options.penalty_reference;
  if (ref) batch.penalties.assign(options.paths, 0.0);
  const double* Q = md.Q.data();
  const double* N = md.N.data();
  const double* L = md.L.data();

  auto path_fn = [&](std::size_t p, MomentSums& sums) {
    rng::NormalStream z(options.seed, p);
    std::vector<double> y(static_cast<std::size_t>(ndp), 0.0), xbar(d), x(d), a(m), aref(m), bb(dp), ss(dp);
    PathRecord* rec = p < batch.records.size() ? &batch.records[p] : nullptr;
    if (rec) {
      rec->x.resize(static_cast<Index>(M + 1), d);
      rec->alpha.resize(static_cast<Index>(M + 1), m);
      rec->y.resize(static_cast<Index>(M + 1), ndp);
    }
    double cost = 0.0, pen = 0.0;
    for (std::size_t k = 0;; ++k) {
      std::fill(xbar.begin(), xbar.end(), 0.0);
      gemv_add(W.data(), d, ndp, y.data(), xbar.data());
      for (Index r = 0; r < d; ++r) x[r] = g0[k * d + r] + xbar[r];
      for (Index r = 0; r < m; ++r) a[r] = open[k * m + r];
      if (feedback) {
        const Mat& G = law.policy->gain(pidx[k]);
        const Vec& o = law.policy->offset(pidx[k]);
        gemv_add(G.data(), m, ndp, y.data(), a.data());
        for (Index r = 0; r < m; ++r) a[r] += o[r];
      }
      for (Index r = 0; r < d; ++r)
        if (!std::isfinite(x[r])) non_finite(p, k);
      sums.add(k, x.data(), d, a.data(), m);
      if (rec) {
        for (Index r = 0; r < d; ++r) rec->x(static_cast<Index>(k), r) = x[r];
        for (Index r = 0; r < m; ++r) rec->alpha(static_cast<Index>(k), r) = a[r];
        for (Index r = 0; r < ndp; ++r) rec->y(static_cast<Index>(k), r) = y[r];
      }
      if (k == M) break;

      double f = quad_form(Q, d, x.data()) + quad_form(N, m, a.data());
      for (Index r = 0; r < d; ++r) f += 2.0 * x[r] * L[r];
      cost += f * dt;
      if (ref) {
        const Mat& G = ref->gain(ridx[k]);
        const Vec& o = ref->offset(ridx[k]);
        for (Index r = 0; r < m; ++r) aref[r] = o[r];
        gemv_add(G.data(), m, ndp, y.data(), aref.data());
        for (Index r = 0; r < m; ++r) aref[r] = a[r] - aref[r];
        pen += quad_form(ref->solution().nhat(ridx[k]).data(), m, aref.data()) * dt;
      }

      for (Index r = 0; r < dp; ++r) {
        bb[r] = bt[k * dp + r];
        ss[r] = gt[k * dp + r];
      }
      gemv_add(md.B.data(), dp, d, xbar.data(), bb.data());
      gemv_add(md.C.data(), dp, m, a.data(), bb.data());
      gemv_add(md.D.data(), dp, d, xbar.data(), ss.data());
      gemv_add(md.F.data(), dp, m, a.data(), ss.data());
      const double dw = sqdt * z();
      for (Index i = 0; i < n; ++i) {
        const double e = decay[static_cast<std::size_t>(i)];
        double* yi = y.data() + i * dp;
        for (Index r = 0; r < dp; ++r) yi[r] = e * (yi[r] + bb[r] * dt + ss[r] * dw);
      }
    }
    if (!std::isfinite(cost)) non_finite(p, M);
    batch.costs[p] = cost;
    if (ref) batch.penalties[p] = pen;
  };
  run_blocks(batch, options, d, path_fn);
  return batch;
}

SimulationBatch simulate_direct_volterra(KernelView kernel, const ModelCoefficients& md, const ControlLaw& law,
                                         const SimOptions& options) {
  check_options(options);
  md.validate();
  const Index d = md.state_dim();
  const Index dp = md.noise_dim();
  const Index m = md.control_dim();
  if (kernel.rows() != d || kernel.cols() != dp)
    throw ValidationError("dimensions", "kernel and model dimensions do not match");
  if (law.kind == ControlLaw::Kind::Feedback)
    throw ValidationError("open_loop_control", "the direct Volterra simulator takes open-loop controls only");
  check_curve(law.curve, m, "control curve");

  SimulationBatch batch = make_batch(options, md.horizon, d);
  const std::size_t M = options.steps;
  const double dt = batch.dt();
  const double sqdt = std::sqrt(dt);

  // kbar[l] = (1/dt) int_{(l-1)dt}^{l dt} K, for lags l = 1..M.
  std::vector<Mat> kbar(M + 1);
  for (std::size_t l = 1; l <= M; ++l)
    kbar[l] = kernel_integral(kernel, static_cast<double>(l - 1) * dt, static_cast<double>(l) * dt) / dt;
  const std::vector<double> g0 = on_grid(md.g0, d, batch.times);
  const std::vector<double> beta = on_grid(md.beta, dp, batch.times);
  const std::vector<double> gamma = on_grid(md.gamma, dp, batch.times);
  const std::vector<double> open =
      law.kind == ControlLaw::Kind::Zero ? std::vector<double>((M + 1) * m, 0.0) : on_grid(law.curve, m, batch.times);
  const double* Q = md.Q.data();
  const double* N = md.N.data();
  const double* L = md.L.data();

  auto path_fn = [&](std::size_t p, MomentSums& sums) {
    rng::NormalStream z(options.seed, p);
    std::vector<double> xi(M * dp, 0.0), x(d), a(m), bb(dp), ss(dp);
    PathRecord* rec = p < batch.records.size() ? &batch.records[p] : nullptr;
    if (rec) {
      rec->x.resize(static_cast<Index>(M + 1), d);
      rec->alpha.resize(static_cast<Index>(M + 1), m);
    }
    double cost = 0.0;
    for (std::size_t k = 0;; ++k) {
      for (Index r = 0; r < d; ++r) x[r] = g0[k * d + r];
      for (std::size_t j = 0; j < k; ++j) gemv_add(kbar[k - j].data(), d, dp, xi.data() + j * dp, x.data());
      for (Index r = 0; r < m; ++r) a[r] = open[k * m + r];
      for (Index r = 0; r < d; ++r)
        if (!std::isfinite(x[r])) non_finite(p, k);
      sums.add(k, x.data(), d, a.data(), m);
      if (rec) {
        for (Index r = 0; r < d; ++r) rec->x(static_cast<Index>(k), r) = x[r];
        for (Index r = 0; r < m; ++r) rec->alpha(static_cast<Index>(k), r) = a[r];
      }
      if (k == M) break;

      double f = quad_form(Q, d, x.data()) + quad_form(N, m, a.data());
      for (Index r = 0; r < d; ++r) f += 2.0 * x[r] * L[r];
      cost += f * dt;

      for (Index r = 0; r < dp; ++r) {
        bb[r] = beta[k * dp + r];
        ss[r] = gamma[k * dp + r];
      }
      gemv_add(md.B.data(), dp, d, x.data(), bb.data());
      gemv_add(md.C.data(), dp, m, a.data(), bb.data());
      gemv_add(md.D.data(), dp, d, x.data(), ss.data());
      gemv_add(md.F.data(), dp, m, a.data(), ss.data());
      const double dw = sqdt * z();
      for (Index r = 0; r < dp; ++r) xi[k * dp + r] = bb[r] * dt + ss[r] * dw;
    }
    batch.costs[p] = cost;
  };
  run_blocks(batch, options, d, path_fn);
  return batch;
}

double paired_rms_gap(const SimulationBatch& a, const SimulationBatch& b) {
  if (a.steps != b.steps || a.records.size() != b.records.size() || a.records.empty())
    throw ValidationError("paired_batches", "batches must share the grid and recorded paths");
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < a.records.size(); ++p) {
    s += (a.records[p].x - b.records[p].x).squaredNorm();
    count += static_cast<std::size_t>(a.records[p].x.rows());
  }
  return std::sqrt(s / static_cast<double>(count));
}

void SimulationBatch::write_paths_csv(const std::string& path, const std::vector<std::size_t>& factors) const {
  if (records.empty()) throw ValidationError("recorded_paths", "no recorded paths to write");
  const Index d = records.front().x.cols();
  const Index m = records.front().alpha.cols();
  const Index ydim = records.front().y.cols();
  std::vector<std::string> header{"path", "t"};
  for (Index r = 0; r < d; ++r) header.push_back("x_" + std::to_string(r + 1));
  for (Index r = 0; r < m; ++r) header.push_back("alpha_" + std::to_string(r + 1));
  std::vector<Index> ycols;
  for (std::size_t f : factors) {
    for (Index r = 0; r < factor_block; ++r) {
      const Index col = static_cast<Index>(f) * factor_block + r;
      if (col >= ydim) throw ValidationError("factor_index", "factor " + std::to_string(f + 1) + " was not simulated");
      ycols.push_back(col);
      header.push_back("y_" + std::to_string(f + 1) + "_" + std::to_string(r + 1));
    }
  }
  csv::Table table(std::move(header));
  for (std::size_t p = 0; p < records.size(); ++p) {
    const PathRecord& rec = records[p];
    for (Index k = 0; k < rec.x.rows(); ++k) {
      std::vector<std::string> row{std::to_string(p), csv::format_double(times[static_cast<std::size_t>(k)])};
      for (Index r = 0; r < d; ++r) row.push_back(csv::format_double(rec.x(k, r)));
      for (Index r = 0; r < m; ++r) row.push_back(csv::format_double(rec.alpha(k, r)));
      for (Index c : ycols) row.push_back(csv::format_double(rec.y(k, c)));
      table.add_row(std::move(row));
    }
  }
  table.write(path);
}

}  // namespace svlq

#include "svlq/riccati.hpp"

#include "svlq/csv.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace svlq {

namespace {

double phi1(double x) { return x > 0.0 ? -std::expm1(-x) / x : 1.0; }

double min_eigenvalue(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void check_dims(const DiscreteMeasure& measure, const ModelCoefficients& model) {
  model.validate();
  if (measure.size() == 0) throw ValidationError("nonempty_measure", "Riccati solve needs at least one atom");
  if (measure.rows() != model.state_dim() || measure.cols() != model.noise_dim())
    throw ValidationError("dimensions", "measure and model dimensions do not match");
}

std::string at_time(double t) {
  std::ostringstream os;
  os << " at t = " << t;
  return os.str();
}

// Node of every row of the stacked block layout.
Vec row_nodes(const DiscreteMeasure& measure, Index block) {
  Vec out(static_cast<Index>(measure.size()) * block);
  for (std::size_t i = 0; i < measure.size(); ++i)
    out.segment(static_cast<Index>(i) * block, block).setConstant(measure.node(i));
  return out;
}

// Exponential-integrator coefficients for one step of length dt applied to a
// term decaying at rate `rate`: value multiplier exp(-rate dt) and forcing
// multiplier dt * phi1(rate dt).
struct ExpCoeffs {
  Mat decay2, weight2;  // rates theta_i + theta_j
  Vec decay1, weight1;  // rates theta_i

  ExpCoeffs(const Vec& nodes, double dt) {
    const Index k = nodes.size();
    decay2.resize(k, k);
    weight2.resize(k, k);
    decay1.resize(k);
    weight1.resize(k);
    for (Index r = 0; r < k; ++r) {
      decay1(r) = std::exp(-nodes(r) * dt);
      weight1(r) = dt * phi1(nodes(r) * dt);
      for (Index c = 0; c < k; ++c) {
        const double lam = nodes(r) + nodes(c);
        decay2(r, c) = std::exp(-lam * dt);
        weight2(r, c) = dt * phi1(lam * dt);
      }
    }
  }
};

}  // namespace

RiccatiRhs::RiccatiRhs(const DiscreteMeasure& measure, const ModelCoefficients& model)
    : measure_(&measure),
      model_(&model),
      n_(static_cast<Index>(measure.size())),
      d_(model.state_dim()),
      dp_(model.noise_dim()),
      m_(model.control_dim()) {}

RiccatiTerms RiccatiRhs::operator()(double t, const Mat& gamma, const Vec& lambda) const {
  const DiscreteMeasure& mu = *measure_;
  const ModelCoefficients& md = *model_;
  const Index nd = n_ * d_;

  Mat U = Mat::Zero(dp_, nd);  // U_j = sum_k c_k' Gamma_kj
  Mat V = Mat::Zero(nd, dp_);  // V_i = sum_l Gamma_il c_l
  Vec ell = Vec::Zero(dp_);    // sum_k c_k' Lambda_k
  for (Index k = 0; k < n_; ++k) {
    const Mat& ck = mu.weight(static_cast<std::size_t>(k));
    U.noalias() += ck.transpose() * gamma.middleRows(k * d_, d_);
    V.noalias() += gamma.middleCols(k * d_, d_) * ck;
    ell.noalias() += ck.transpose() * lambda.segment(k * d_, d_);
  }
  RiccatiTerms T;
  T.aggregate = Mat::Zero(dp_, dp_);
  for (Index j = 0; j < n_; ++j)
    T.aggregate.noalias() += U.middleCols(j * d_, d_) * mu.weight(static_cast<std::size_t>(j));
  const Mat& agg = T.aggregate;

  const Mat agg_d = agg * md.D;
  T.S = md.C.transpose() * U + (md.F.transpose() * agg_d).replicate(1, n_);
  T.nhat = md.N + md.F.transpose() * agg * md.F;
  T.nhat = 0.5 * (T.nhat + T.nhat.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Mat> es(T.nhat, Eigen::EigenvaluesOnly);
  T.nhat_min_eig = es.eigenvalues().minCoeff();
  const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(T.nhat_min_eig > 1e-12 * norm))
    throw NumericalError("nhat_invertible", "N + F' Gamma F is numerically singular" + at_time(t) +
                                                " (smallest eigenvalue " + csv::format_double(T.nhat_min_eig) + ")");
  const Eigen::LDLT<Mat> ldlt(T.nhat);
  const Mat k_gain = ldlt.solve(T.S);

  const Vec g0 = md.g0(t);
  const Vec bt = md.beta_tilde(t);
  const Vec gt = md.gamma_tilde(t);
  const Vec agg_g = agg * gt;
  T.h = md.C.transpose() * ell + md.F.transpose() * agg_g;
  const Vec k_off = ldlt.solve(T.h);

  T.r1 = (md.Q + md.D.transpose() * agg_d).replicate(n_, n_);
  T.r1 += (md.B.transpose() * U).replicate(n_, 1);
  T.r1 += (V * md.B).replicate(1, n_);
  T.r1.noalias() -= T.S.transpose() * k_gain;

  const Vec base = md.L + md.Q * g0 + md.B.transpose() * ell + md.D.transpose() * agg_g;
  T.r2 = base.replicate(n_, 1) + V * bt;
  T.r2.noalias() -= T.S.transpose() * k_off;

  T.r3 = g0.dot(md.Q * g0) + 2.0 * md.L.dot(g0) + gt.dot(agg_g) + 2.0 * bt.dot(ell) - T.h.dot(k_off);
  return T;
}

Mat rhs_r1(const Mat& gamma, const DiscreteMeasure& measure, const ModelCoefficients& model) {
  const Vec lambda = Vec::Zero(gamma.rows());
  return RiccatiRhs(measure, model)(0.0, gamma, lambda).r1;
}

Vec rhs_r2(double t, const Mat& gamma, const Vec& lambda, const DiscreteMeasure& measure,
           const ModelCoefficients& model) {
  return RiccatiRhs(measure, model)(t, gamma, lambda).r2;
}

double rhs_r3(double t, const Mat& gamma, const Vec& lambda, const DiscreteMeasure& measure,
              const ModelCoefficients& model) {
  return RiccatiRhs(measure, model)(t, gamma, lambda).r3;
}

Scheme parse_scheme(const std::string& name) {
  if (name == "exp-euler") return Scheme::ExpEuler;
  if (name == "exp-midpoint") return Scheme::ExpMidpoint;
  throw ValidationError("scheme", "unknown Riccati scheme '" + name + "' (expected exp-euler or exp-midpoint)");
}

std::string scheme_name(Scheme s) { return s == Scheme::ExpEuler ? "exp-euler" : "exp-midpoint"; }

// Fills a RiccatiSolution grid point by grid point and enforces the invariants.
class RiccatiBuilder {
 public:
  RiccatiBuilder(const DiscreteMeasure& measure, const ModelCoefficients& model, std::size_t steps,
                 const RiccatiOptions& options)
      : measure_(measure), model_(model), options_(options), rhs_(measure, model) {
    if (steps == 0) throw ValidationError("steps_positive", "Riccati solve needs at least one time step");
    if (!(model.horizon > 0.0) || !std::isfinite(model.horizon))
      throw ValidationError("horizon_positive", "horizon must be positive and finite");
    const double dt = model.horizon / static_cast<double>(steps);
    sol_.times_.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) sol_.times_[k] = static_cast<double>(k) * dt;
    sol_.times_.back() = model.horizon;
    sol_.blocks_ = static_cast<Index>(measure.size());
    sol_.block_size_ = model.state_dim();
    sol_.gamma_.resize(steps + 1);
    sol_.lambda_.resize(steps + 1);
    sol_.chi_.resize(steps + 1);
    sol_.s_.resize(steps + 1);
    sol_.nhat_.resize(steps + 1);
    sol_.h_.resize(steps + 1);
    sol_.report_.min_lifted_eig = std::numeric_limits<double>::infinity();
    sol_.report_.min_nhat_excess_eig = std::numeric_limits<double>::infinity();
  }

  const RiccatiRhs& rhs() const { return rhs_; }
  double time(std::size_t k) const { return sol_.times_[k]; }
  double dt() const { return sol_.times_[1] - sol_.times_[0]; }

  // Checks and symmetrizes gamma, evaluates the RHS terms at t_k and stores
  // everything. Returns the terms for the next step.
  RiccatiTerms record(std::size_t k, Mat gamma, Vec lambda, double chi) {
    const double t = sol_.times_[k];
    if (!gamma.allFinite() || !lambda.allFinite() || !std::isfinite(chi))
      throw NumericalError("finite_solution", "Riccati solution became non-finite" + at_time(t));
    const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
    const double asym = (gamma - gamma.transpose()).cwiseAbs().maxCoeff();
    InvariantReport& rep = sol_.report_;
    rep.max_asymmetry = std::max(rep.max_asymmetry, asym);
    if (asym > options_.symmetry_tol * scale)
      throw NumericalError("symmetric_gamma", "Gamma(t, theta, eta) lost symmetry" + at_time(t) +
                                                  " (deviation " + csv::format_double(asym) + ")");
    gamma = 0.5 * (gamma + gamma.transpose()).eval();

    RiccatiTerms terms = rhs_(t, gamma, lambda);

    const Index n = sol_.blocks_;
    const Index d = sol_.block_size_;
    const Index dp = model_.noise_dim();
    Mat lifted(n * dp, n * dp);
    double row_bound = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Mat& ci = measure_.weight(static_cast<std::size_t>(i));
      double row = 0.0;
      for (Index j = 0; j < n; ++j) {
        const Mat& cj = measure_.weight(static_cast<std::size_t>(j));
        const auto g = gamma.block(i * d, j * d, d, d);
        lifted.block(i * dp, j * dp, dp, dp) = ci.transpose() * g * cj;
        row += g.norm() * cj.norm();
      }
      row_bound = std::max(row_bound, row);
    }
    rep.row_sum_bound = std::max(rep.row_sum_bound, row_bound);
    const double lscale = std::max(1.0, lifted.cwiseAbs().maxCoeff());
    const double leig = min_eigenvalue(lifted);
    rep.min_lifted_eig = std::min(rep.min_lifted_eig, leig);
    rep.lifted_scale = std::max(rep.lifted_scale, lscale);
    if (leig < -options_.psd_tol * lscale)
      throw NumericalError("psd_gamma", "[c_i' Gamma_ij c_j] is not positive semidefinite" + at_time(t) +
                                            " (eigenvalue " + csv::format_double(leig) + ")");
    const double excess = min_eigenvalue(terms.nhat - model_.N);
    rep.min_nhat_excess_eig = std::min(rep.min_nhat_excess_eig, excess);
    if (excess < -options_.psd_tol * std::max(1.0, terms.nhat.cwiseAbs().maxCoeff()))
      throw NumericalError("nhat_dominates_n", "N^ - N is not positive semidefinite" + at_time(t));

    sol_.gamma_[k] = std::move(gamma);
    sol_.lambda_[k] = std::move(lambda);
    sol_.chi_[k] = chi;
    sol_.s_[k] = terms.S;
    sol_.nhat_[k] = terms.nhat;
    sol_.h_[k] = terms.h;
    return terms;
  }

  const Mat& gamma(std::size_t k) const { return sol_.gamma_[k]; }
  const Vec& lambda(std::size_t k) const { return sol_.lambda_[k]; }
  double chi(std::size_t k) const { return sol_.chi_[k]; }
  void set_chi(std::size_t k, double chi) {
    if (!std::isfinite(chi)) throw NumericalError("finite_solution", "chi became non-finite" + at_time(time(k)));
    sol_.chi_[k] = chi;
  }

  RiccatiSolution finish() { return std::move(sol_); }

 private:
  const DiscreteMeasure& measure_;
  const ModelCoefficients& model_;
  RiccatiOptions options_;
  RiccatiRhs rhs_;
  RiccatiSolution sol_;
};

RiccatiSolution solve_backward(const DiscreteMeasure& measure, const ModelCoefficients& model,
                               const RiccatiOptions& options) {
  check_dims(measure, model);
  RiccatiBuilder b(measure, model, options.steps, options);
  const std::size_t M = options.steps;
  const Index nd = static_cast<Index>(measure.size()) * model.state_dim();
  const Vec nodes = row_nodes(measure, model.state_dim());
  const double dt = b.dt();
  const ExpCoeffs full(nodes, dt);
  const ExpCoeffs half(nodes, 0.5 * dt);

  RiccatiTerms next = b.record(M, Mat::Zero(nd, nd), Vec::Zero(nd), 0.0);
  for (std::size_t k = M; k-- > 0;) {
    const Mat& g1 = b.gamma(k + 1);
    const Vec& l1 = b.lambda(k + 1);
    Mat g0;
    Vec l0;
    if (options.scheme == Scheme::ExpEuler) {
      g0 = full.decay2.cwiseProduct(g1) + full.weight2.cwiseProduct(next.r1);
      l0 = full.decay1.cwiseProduct(l1) + full.weight1.cwiseProduct(next.r2);
    } else {
      const Mat gm = half.decay2.cwiseProduct(g1) + half.weight2.cwiseProduct(next.r1);
      const Vec lm = half.decay1.cwiseProduct(l1) + half.weight1.cwiseProduct(next.r2);
      const RiccatiTerms mid = b.rhs()(b.time(k + 1) - 0.5 * dt, 0.5 * (gm + gm.transpose()), lm);
      g0 = full.decay2.cwiseProduct(g1) + full.weight2.cwiseProduct(mid.r1);
      l0 = full.decay1.cwiseProduct(l1) + full.weight1.cwiseProduct(mid.r2);
    }
    // chi is updated after R3 is known at both ends (trapezoid).
    const double r3_next = next.r3;
    RiccatiTerms cur = b.record(k, std::move(g0), std::move(l0), 0.0);
    b.set_chi(k, b.chi(k + 1) + 0.5 * dt * (cur.r3 + r3_next));
    next = std::move(cur);
  }
  return b.finish();
}

RiccatiSolution oracle_rk4(const DiscreteMeasure& measure, const ModelCoefficients& model, std::size_t steps) {
  check_dims(measure, model);
  RiccatiOptions options;
  options.steps = steps;
  RiccatiBuilder b(measure, model, steps, options);
  const double dt = b.dt();
  if (measure.max_node() * dt > 0.1)
    throw NumericalError("stiffness_guard", "RK4 reference needs max theta * dt <= 0.1, got " +
                                                csv::format_double(measure.max_node() * dt));
  const Index nd = static_cast<Index>(measure.size()) * model.state_dim();
  const Vec nodes = row_nodes(measure, model.state_dim());
  Mat rates2(nd, nd);
  for (Index r = 0; r < nd; ++r)
    for (Index c = 0; c < nd; ++c) rates2(r, c) = nodes(r) + nodes(c);

  struct State {
    Mat g;
    Vec l;
    double chi;
  };
  // Derivative in reversed time s = T - t.
  auto deriv = [&](double t, const State& s) {
    const RiccatiTerms T = b.rhs()(t, 0.5 * (s.g + s.g.transpose()), s.l);
    return State{T.r1 - rates2.cwiseProduct(s.g), T.r2 - nodes.cwiseProduct(s.l), T.r3};
  };
  auto axpy = [](const State& s, double h, const State& k) {
    return State{s.g + h * k.g, s.l + h * k.l, s.chi + h * k.chi};
  };

  const std::size_t M = steps;
  b.record(M, Mat::Zero(nd, nd), Vec::Zero(nd), 0.0);
  State cur{Mat::Zero(nd, nd), Vec::Zero(nd), 0.0};
  for (std::size_t k = M; k-- > 0;) {
    const double t1 = b.time(k + 1);
    const State k1 = deriv(t1, cur);
    const State k2 = deriv(t1 - 0.5 * dt, axpy(cur, 0.5 * dt, k1));
    const State k3 = deriv(t1 - 0.5 * dt, axpy(cur, 0.5 * dt, k2));
    const State k4 = deriv(t1 - dt, axpy(cur, dt, k3));
    cur.g += dt / 6.0 * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g);
    cur.l += dt / 6.0 * (k1.l + 2.0 * k2.l + 2.0 * k3.l + k4.l);
    cur.chi += dt / 6.0 * (k1.chi + 2.0 * k2.chi + 2.0 * k3.chi + k4.chi);
    b.record(k, cur.g, cur.l, cur.chi);
    cur.g = b.gamma(k);
  }
  return b.finish();
}

void RiccatiSolution::write_csv(const std::string& path, std::size_t stride) const {
  if (stride == 0) stride = 1;
  csv::Table table({"kind", "t", "i", "j", "row", "col", "value"});
  const Index d = block_size_;
  auto idx = [](Index v) { return std::to_string(v + 1); };
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (k % stride != 0 && k + 1 != times_.size()) continue;
    const std::string t = csv::format_double(times_[k]);
    for (Index i = 0; i < blocks_; ++i)
      for (Index j = 0; j < blocks_; ++j)
        for (Index r = 0; r < d; ++r)
          for (Index c = 0; c < d; ++c)
            table.add_row({"gamma", t, idx(i), idx(j), idx(r), idx(c),
                           csv::format_double(gamma_[k](i * d + r, j * d + c))});
    for (Index i = 0; i < blocks_; ++i)
      for (Index r = 0; r < d; ++r)
        table.add_row({"lambda", t, idx(i), "", idx(r), "", csv::format_double(lambda_[k](i * d + r))});
    table.add_row({"chi", t, "", "", "", "", csv::format_double(chi_[k])});
  }
  table.write(path);
}

FlatRiccatiSolution solve_flat(const FlatLQ& flat, std::size_t steps, double horizon, Scheme scheme) {
  if (steps == 0) throw ValidationError("steps_positive", "Riccati solve needs at least one time step");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ValidationError("horizon_positive", "horizon must be positive and finite");
  const Index n = flat.size();
  const Vec& nodes = flat.mean_reversion;
  const Mat a_shift = flat.A + Mat(nodes.asDiagonal());
  const double dt = horizon / static_cast<double>(steps);
  const ExpCoeffs full(nodes, dt);
  const ExpCoeffs half(nodes, 0.5 * dt);

  auto rhs = [&](const Mat& g) {
    const Mat s = flat.C.transpose() * g + flat.F.transpose() * g * flat.D;
    const Mat nhat = flat.N + flat.F.transpose() * g * flat.F;
    const Eigen::LDLT<Mat> ldlt(0.5 * (nhat + nhat.transpose()));
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
      throw NumericalError("nhat_invertible", "N + F' Gamma F is not positive definite");
    Mat r = flat.Q + a_shift.transpose() * g + g * a_shift + flat.D.transpose() * g * flat.D;
    r.noalias() -= s.transpose() * ldlt.solve(s);
    return r;
  };

  FlatRiccatiSolution out;
  out.times.resize(steps + 1);
  out.gamma.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) out.times[k] = static_cast<double>(k) * dt;
  out.times.back() = horizon;
  out.gamma[steps] = Mat::Zero(n, n);
  out.min_eig = 0.0;
  Mat r_next = rhs(out.gamma[steps]);
  for (std::size_t k = steps; k-- > 0;) {
    const Mat& g1 = out.gamma[k + 1];
    Mat g0;
    if (scheme == Scheme::ExpEuler) {
      g0 = full.decay2.cwiseProduct(g1) + full.weight2.cwiseProduct(r_next);
    } else {
      const Mat gm = half.decay2.cwiseProduct(g1) + half.weight2.cwiseProduct(r_next);
      g0 = full.decay2.cwiseProduct(g1) + full.weight2.cwiseProduct(rhs(0.5 * (gm + gm.transpose())));
    }
    if (!g0.allFinite()) throw NumericalError("finite_solution", "flat Riccati solution became non-finite");
    out.max_asymmetry = std::max(out.max_asymmetry, (g0 - g0.transpose()).cwiseAbs().maxCoeff());
    g0 = 0.5 * (g0 + g0.transpose()).eval();
    out.min_eig = std::min(out.min_eig, min_eigenvalue(g0));
    r_next = rhs(g0);
    out.gamma[k] = std::move(g0);
  }
  return out;
}

}  // namespace svlq

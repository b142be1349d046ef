#pragma once

#include "svlq/kernels.hpp"
#include "svlq/liftlq.hpp"
#include "svlq/model.hpp"

#include <string>
#include <vector>

namespace svlq {

// Kernel-valued Riccati data over n atoms is stored as block matrices:
// Gamma is (n d) x (n d) with d x d block (i, j) = Gamma(theta_i, theta_j),
// Lambda is a stacked vector in R^{n d} with block i = Lambda(theta_i).

/// Every term of the Riccati right-hand side at one (t, Gamma, Lambda).
struct RiccatiTerms {
  Mat aggregate;  // sum_kl c_k' Gamma_kl c_l, d' x d'
  Mat S;          // [S(theta_1) ... S(theta_n)], m x n d
  Mat nhat;       // N + F' aggregate F
  Vec h;          // C' sum_k c_k' Lambda_k + F' aggregate gamma~
  Mat r1;
  Vec r2;
  double r3 = 0.0;
  double nhat_min_eig = 0.0;
};

/// Evaluates R1, R2, R3 with all mu-integrals replaced by atom sums.
class RiccatiRhs {
 public:
  RiccatiRhs(const DiscreteMeasure& measure, const ModelCoefficients& model);

  // Throws NumericalError("nhat_invertible") when N^ is numerically singular.
  RiccatiTerms operator()(double t, const Mat& gamma, const Vec& lambda) const;

  Index blocks() const { return n_; }
  Index block_size() const { return d_; }

 private:
  const DiscreteMeasure* measure_;
  const ModelCoefficients* model_;
  Index n_, d_, dp_, m_;
};

Mat rhs_r1(const Mat& gamma, const DiscreteMeasure& measure, const ModelCoefficients& model);
Vec rhs_r2(double t, const Mat& gamma, const Vec& lambda, const DiscreteMeasure& measure,
           const ModelCoefficients& model);
double rhs_r3(double t, const Mat& gamma, const Vec& lambda, const DiscreteMeasure& measure,
              const ModelCoefficients& model);

enum class Scheme { ExpEuler, ExpMidpoint };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

struct RiccatiOptions {
  std::size_t steps = 2000;
  Scheme scheme = Scheme::ExpMidpoint;
  double symmetry_tol = 1e-10;
  double psd_tol = 1e-8;  // relative to the largest entry
};

/// Worst values of the solution invariants over the whole grid.
struct InvariantReport {
  double max_asymmetry = 0.0;
  double min_lifted_eig = 0.0;       // smallest eigenvalue of [c_i' Gamma_ij c_j]
  double lifted_scale = 0.0;         // largest |entry| seen, for the relative PSD test
  double min_nhat_excess_eig = 0.0;  // smallest eigenvalue of N^ - N
  double row_sum_bound = 0.0;        // M = max_t max_i sum_j |Gamma_ij| |c_j|
};

class RiccatiSolution {
 public:
  std::size_t steps() const { return times_.size() - 1; }
  double dt() const { return times_[1] - times_[0]; }
  double horizon() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  double time(std::size_t k) const { return times_[k]; }
  Index blocks() const { return blocks_; }
  Index block_size() const { return block_size_; }

  const Mat& gamma(std::size_t k) const { return gamma_[k]; }
  Mat gamma_block(std::size_t k, Index i, Index j) const {
    return gamma_[k].block(i * block_size_, j * block_size_, block_size_, block_size_);
  }
  const Vec& lambda(std::size_t k) const { return lambda_[k]; }
  double chi(std::size_t k) const { return chi_[k]; }
  double chi0() const { return chi_.front(); }
  const Mat& S(std::size_t k) const { return s_[k]; }
  const Mat& nhat(std::size_t k) const { return nhat_[k]; }
  const Vec& h(std::size_t k) const { return h_[k]; }
  const InvariantReport& invariants() const { return report_; }

  // Long-format CSV (kind,t,i,j,row,col,value); every `stride`-th grid time
  // plus t = 0 and t = T.
  void write_csv(const std::string& path, std::size_t stride = 1) const;

 private:
  friend class RiccatiBuilder;
  std::vector<double> times_;
  Index blocks_ = 0;
  Index block_size_ = 0;
  std::vector<Mat> gamma_;
  std::vector<Vec> lambda_;
  std::vector<double> chi_;
  std::vector<Mat> s_;
  std::vector<Mat> nhat_;
  std::vector<Vec> h_;
  InvariantReport report_;
};

// Backward exponential-integrator solve of the mild Riccati system.
RiccatiSolution solve_backward(const DiscreteMeasure& measure, const ModelCoefficients& model,
                               const RiccatiOptions& options = {});

// Classical RK4 on the non-mild ODE form; a brute-force reference for
// solve_backward. Throws NumericalError("stiffness_guard") when
// max theta_i * dt > 0.1.
RiccatiSolution oracle_rk4(const DiscreteMeasure& measure, const ModelCoefficients& model, std::size_t steps);

/// Trajectory of the flat n x n matrix Riccati equation.
struct FlatRiccatiSolution {
  std::vector<double> times;
  std::vector<Mat> gamma;
  double max_asymmetry = 0.0;
  double min_eig = 0.0;
};

FlatRiccatiSolution solve_flat(const FlatLQ& flat, std::size_t steps, double horizon,
                               Scheme scheme = Scheme::ExpMidpoint);

}  // namespace svlq

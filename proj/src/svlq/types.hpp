#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace svlq {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Every failure names the invariant or precondition it violated so callers
// (and the CLI exit codes) can distinguish bad input from numerical trouble.
class Error : public std::runtime_error {
 public:
  Error(std::string invariant, const std::string& what)
      : std::runtime_error(what), invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

// Input rejected before any computation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A runtime invariant failed during a solve or simulation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Vector-valued polynomial curve t -> sum_k coeffs.col(k) t^k.
///
/// Covers every deterministic input curve of the model (beta, gamma, g0) and
/// the control perturbations used in verification.
class Curve {
 public:
  Curve() = default;
  // coeffs: dim x (degree+1), column k multiplies t^k.
  explicit Curve(Mat coeffs) : coeffs_(std::move(coeffs)) {}

  static Curve zero(Index dim) { return Curve(Mat::Zero(dim, 1)); }
  static Curve constant(const Vec& value) { return Curve(Mat(value)); }
  static Curve scalar_poly(const std::vector<double>& coeffs) {
    Mat c(1, static_cast<Index>(coeffs.size()));
    for (std::size_t k = 0; k < coeffs.size(); ++k) c(0, static_cast<Index>(k)) = coeffs[k];
    return Curve(std::move(c));
  }

  Index dim() const { return coeffs_.rows(); }
  const Mat& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.size() == 0 || coeffs_.isZero(0.0); }

  Vec operator()(double t) const {
    Vec out = Vec::Zero(coeffs_.rows());
    for (Index k = coeffs_.cols() - 1; k >= 0; --k) out = out * t + coeffs_.col(k);
    return out;
  }

  Curve shifted(const Vec& offset) const {
    Mat c = coeffs_;
    if (c.cols() == 0) c = Mat::Zero(offset.size(), 1);
    c.col(0) += offset;
    return Curve(std::move(c));
  }

 private:
  Mat coeffs_;
};

}  // namespace svlq

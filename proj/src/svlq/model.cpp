#include "svlq/model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace svlq {

namespace {

void require(bool ok, const char* invariant, const std::string& msg) {
  if (!ok) throw ValidationError(invariant, msg);
}

double min_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

void ModelCoefficients::validate() const {
  const Index d = Q.rows();
  const Index dp = B.rows();
  const Index m = N.rows();
  require(d > 0 && dp > 0 && m > 0, "dimensions", "model dimensions must be positive");
  require(Q.cols() == d, "dimensions", "Q must be d x d");
  require(N.cols() == m, "dimensions", "N must be m x m");
  require(B.cols() == d, "dimensions", "B must be d' x d");
  require(D.rows() == dp && D.cols() == d, "dimensions", "D must be d' x d");
  require(C.rows() == dp && C.cols() == m, "dimensions", "C must be d' x m");
  require(F.rows() == dp && F.cols() == m, "dimensions", "F must be d' x m");
  require(L.size() == d, "dimensions", "L must have length d");
  require(beta.dim() == dp, "dimensions", "beta must take values in R^{d'}");
  require(gamma.dim() == dp, "dimensions", "gamma must take values in R^{d'}");
  require(g0.dim() == d, "dimensions", "g0 must take values in R^d");
  require(std::isfinite(horizon) && horizon > 0.0, "horizon", "horizon T must be positive and finite");
  for (const Mat* mat : {&B, &C, &D, &F, &Q, &N})
    require(mat->allFinite(), "finite_coefficients", "model matrices must be finite");
  require(L.allFinite() && beta.coeffs().allFinite() && gamma.coeffs().allFinite() && g0.coeffs().allFinite(),
          "finite_coefficients", "model curves must be finite");
  require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff()),
          "Q_symmetric", "Q must be symmetric");
  require((N - N.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, N.cwiseAbs().maxCoeff()),
          "N_symmetric", "N must be symmetric");
  require(min_eigenvalue(Q) >= -1e-12, "Q_psd", "Q must be positive semidefinite");
  require(min_eigenvalue(N) >= 1e-10, "N_positive_definite", "N must be positive definite (N - lambda I PSD, lambda > 0)");
}

ModelCoefficients brownian_regulator(double horizon) {
  ModelCoefficients m;
  m.B = Mat::Zero(1, 1);
  m.C = Mat::Ones(1, 1);
  m.D = Mat::Zero(1, 1);
  m.F = Mat::Zero(1, 1);
  m.beta = Curve::zero(1);
  m.gamma = Curve::constant(Vec::Ones(1));
  m.g0 = Curve::zero(1);
  m.Q = Mat::Ones(1, 1);
  m.N = Mat::Ones(1, 1);
  m.L = Vec::Zero(1);
  m.horizon = horizon;
  return m;
}

}  // namespace svlq

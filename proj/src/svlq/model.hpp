#pragma once

#include "svlq/types.hpp"

namespace svlq {

/// Data of the linear-quadratic Volterra control problem.
///
/// State X in R^d, factor noise dimension d', control in R^m:
///   b(t, x, a) = beta(t) + B x + C a,  sigma(t, x, a) = gamma(t) + D x + F a,
///   f(x, a)    = x' Q x + a' N a + 2 x' L.
struct ModelCoefficients {
  Mat B;  // d' x d
  Mat C;  // d' x m
  Mat D;  // d' x d
  Mat F;  // d' x m
  Curve beta;   // R^{d'}
  Curve gamma;  // R^{d'}
  Curve g0;     // R^d
  Mat Q;  // d x d, symmetric PSD
  Mat N;  // m x m, symmetric PD
  Vec L;  // R^d
  double horizon = 1.0;

  Index state_dim() const { return Q.rows(); }
  Index noise_dim() const { return B.rows(); }
  Index control_dim() const { return N.rows(); }

  // beta + B g0 and gamma + D g0.
  Vec beta_tilde(double t) const { return beta(t) + B * g0(t); }
  Vec gamma_tilde(double t) const { return gamma(t) + D * g0(t); }

  double running_cost(const Vec& x, const Vec& a) const {
    return x.dot(Q * x) + a.dot(N * a) + 2.0 * x.dot(L);
  }

  // Throws ValidationError naming the violated condition.
  void validate() const;
};

// The controlled Brownian regulator: dX = a dt + dW, cost int X^2 + a^2.
ModelCoefficients brownian_regulator(double horizon = 1.0);

}  // namespace svlq

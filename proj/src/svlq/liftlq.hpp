#pragma once

#include "svlq/kernels.hpp"
#include "svlq/model.hpp"

namespace svlq {

/// Finite-dimensional Markovian lift of the controlled Volterra equation.
///
/// Factors Y^i in R^{d'} (one per atom) follow
///   dY^i = (-theta_i Y^i + beta~(t) + B Xbar + C a) dt + (gamma~(t) + D Xbar + F a) dW,
/// with Xbar = sum_j c_j Y^j and state X = g0(t) + Xbar. Factor vectors are
/// stored stacked, Y = (Y^1, ..., Y^n) in R^{n d'}.
class LiftedSystem {
 public:
  LiftedSystem(DiscreteMeasure measure, ModelCoefficients model);

  const DiscreteMeasure& measure() const { return measure_; }
  const ModelCoefficients& model() const { return model_; }
  std::size_t factors() const { return measure_.size(); }
  Index factor_dim() const { return static_cast<Index>(measure_.size()) * model_.noise_dim(); }
  // [c_1 ... c_n], d x n d'.
  const Mat& stacked_weights() const { return weights_; }

  Vec aggregate(const Vec& y) const { return weights_ * y; }
  Vec state(double t, const Vec& y) const { return model_.g0(t) + aggregate(y); }
  // Drift and diffusion of the stacked factor SDE.
  Vec drift(double t, const Vec& y, const Vec& a) const;
  Vec diffusion(double t, const Vec& y, const Vec& a) const;

 private:
  DiscreteMeasure measure_;
  ModelCoefficients model_;
  Mat weights_;
};

LiftedSystem assemble(DiscreteMeasure measure, ModelCoefficients model);

enum class FlatConvention {
  Rescaled,  // Z^i = c_i Y^i; Gamma^n_{ij} = Gamma(theta_i, theta_j)
  Factor,    // Y^i itself;   Gamma^n_{ij} = c_i' Gamma(theta_i, theta_j) c_j
};

/// Conventional LQ data over a flat state with block size `block`:
///   dZ = (A Z + ...) dt + (D Z + F a + ...) dW, Xbar = reconstruction * Z.
/// `mean_reversion` holds the diagonal -theta part already included in A.
struct FlatLQ {
  FlatConvention convention = FlatConvention::Rescaled;
  Index block = 1;
  Mat A;
  Vec mean_reversion;
  Mat C;
  Mat D;
  Mat F;
  Mat Q;
  Mat N;
  Mat reconstruction;

  Index size() const { return A.rows(); }
};

FlatLQ flatten(const DiscreteMeasure& measure, const ModelCoefficients& model,
               FlatConvention convention = FlatConvention::Rescaled);

// Recovers the atoms from a Factor-convention flattening.
DiscreteMeasure unflatten(const FlatLQ& flat);

}  // namespace svlq

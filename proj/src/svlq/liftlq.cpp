#include "svlq/liftlq.hpp"

#include <string>

namespace svlq {

LiftedSystem::LiftedSystem(DiscreteMeasure measure, ModelCoefficients model)
    : measure_(std::move(measure)), model_(std::move(model)) {
  model_.validate();
  if (measure_.size() == 0) throw ValidationError("nonempty_measure", "lifted system needs at least one atom");
  if (measure_.rows() != model_.state_dim() || measure_.cols() != model_.noise_dim())
    throw ValidationError("dimensions", "measure is " + std::to_string(measure_.rows()) + "x" +
                                            std::to_string(measure_.cols()) + " but the model needs d x d' = " +
                                            std::to_string(model_.state_dim()) + "x" +
                                            std::to_string(model_.noise_dim()));
  weights_ = measure_.stacked_weights();
}

Vec LiftedSystem::drift(double t, const Vec& y, const Vec& a) const {
  const Index dp = model_.noise_dim();
  const Vec xbar = aggregate(y);
  const Vec common = model_.beta_tilde(t) + model_.B * xbar + model_.C * a;
  Vec out(y.size());
  for (std::size_t i = 0; i < factors(); ++i) {
    const Index off = static_cast<Index>(i) * dp;
    out.segment(off, dp) = -measure_.node(i) * y.segment(off, dp) + common;
  }
  return out;
}

Vec LiftedSystem::diffusion(double t, const Vec& y, const Vec& a) const {
  const Vec common = model_.gamma_tilde(t) + model_.D * aggregate(y) + model_.F * a;
  return common.replicate(static_cast<Index>(factors()), 1);
}

LiftedSystem assemble(DiscreteMeasure measure, ModelCoefficients model) {
  return LiftedSystem(std::move(measure), std::move(model));
}

FlatLQ flatten(const DiscreteMeasure& measure, const ModelCoefficients& model, FlatConvention convention) {
  model.validate();
  if (measure.rows() != model.state_dim() || measure.cols() != model.noise_dim())
    throw ValidationError("dimensions", "measure and model dimensions do not match");
  const Index n = static_cast<Index>(measure.size());
  const Index d = model.state_dim();
  const Index dp = model.noise_dim();
  const Index m = model.control_dim();

  FlatLQ f;
  f.convention = convention;
  f.N = model.N;
  if (convention == FlatConvention::Rescaled) {
    const Index b = d;
    f.block = b;
    f.A = Mat::Zero(n * b, n * b);
    f.D = Mat::Zero(n * b, n * b);
    f.C = Mat::Zero(n * b, m);
    f.F = Mat::Zero(n * b, m);
    f.Q = Mat::Zero(n * b, n * b);
    f.mean_reversion = Vec::Zero(n * b);
    f.reconstruction = Mat::Zero(d, n * b);
    for (Index i = 0; i < n; ++i) {
      const Mat& ci = measure.weight(static_cast<std::size_t>(i));
      const double th = measure.node(static_cast<std::size_t>(i));
      for (Index j = 0; j < n; ++j) {
        f.A.block(i * b, j * b, b, b) = ci * model.B;
        f.D.block(i * b, j * b, b, b) = ci * model.D;
        f.Q.block(i * b, j * b, b, b) = model.Q;
      }
      f.A.block(i * b, i * b, b, b) -= th * Mat::Identity(b, b);
      f.mean_reversion.segment(i * b, b).setConstant(th);
      f.C.middleRows(i * b, b) = ci * model.C;
      f.F.middleRows(i * b, b) = ci * model.F;
      f.reconstruction.middleCols(i * b, b) = Mat::Identity(d, d);
    }
    return f;
  }

  const Index b = dp;
  f.block = b;
  f.A = Mat::Zero(n * b, n * b);
  f.D = Mat::Zero(n * b, n * b);
  f.C = Mat::Zero(n * b, m);
  f.F = Mat::Zero(n * b, m);
  f.Q = Mat::Zero(n * b, n * b);
  f.mean_reversion = Vec::Zero(n * b);
  f.reconstruction = measure.stacked_weights();
  for (Index i = 0; i < n; ++i) {
    const double th = measure.node(static_cast<std::size_t>(i));
    for (Index j = 0; j < n; ++j) {
      const Mat& cj = measure.weight(static_cast<std::size_t>(j));
      const Mat& ci = measure.weight(static_cast<std::size_t>(i));
      f.A.block(i * b, j * b, b, b) = model.B * cj;
      f.D.block(i * b, j * b, b, b) = model.D * cj;
      f.Q.block(i * b, j * b, b, b) = ci.transpose() * model.Q * cj;
    }
    f.A.block(i * b, i * b, b, b) -= th * Mat::Identity(b, b);
    f.mean_reversion.segment(i * b, b).setConstant(th);
    f.C.middleRows(i * b, b) = model.C;
    f.F.middleRows(i * b, b) = model.F;
  }
  return f;
}

DiscreteMeasure unflatten(const FlatLQ& flat) {
  if (flat.convention != FlatConvention::Factor)
    throw ValidationError("flat_convention", "atoms are recoverable only from the Factor convention");
  const Index b = flat.block;
  const Index n = flat.size() / b;
  std::vector<Atom> atoms;
  for (Index i = 0; i < n; ++i)
    atoms.push_back({flat.reconstruction.middleCols(i * b, b), flat.mean_reversion(i * b)});
  return DiscreteMeasure(std::move(atoms));
}

}  // namespace svlq

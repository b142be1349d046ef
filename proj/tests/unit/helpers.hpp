#pragma once

#include "svlq/kernels.hpp"
#include "svlq/model.hpp"

#include <random>
#include <vector>

namespace svlq::testing {

inline DiscreteMeasure dirac(double weight = 1.0) { return DiscreteMeasure({Atom{Mat::Constant(1, 1, weight), 0.0}}); }

inline DiscreteMeasure scalar_measure(const std::vector<double>& nodes, const std::vector<double>& weights) {
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < nodes.size(); ++i) atoms.push_back({Mat::Constant(1, 1, weights[i]), nodes[i]});
  return DiscreteMeasure(std::move(atoms));
}

inline Mat scalar(double v) { return Mat::Constant(1, 1, v); }

// Scalar model with every coefficient switched on, drawn from a fixed seed.
inline ModelCoefficients random_scalar_model(unsigned seed, double horizon = 1.0) {
  std::mt19937_64 gen(seed);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
  ModelCoefficients m;
  m.B = scalar(u(-0.5, 0.5));
  m.C = scalar(u(0.5, 1.5));
  m.D = scalar(u(-0.3, 0.3));
  m.F = scalar(u(-0.3, 0.3));
  m.Q = scalar(u(0.5, 1.5));
  m.N = scalar(u(0.5, 1.5));
  m.L = Vec::Constant(1, u(-0.3, 0.3));
  m.beta = Curve::scalar_poly({u(-0.5, 0.5), u(-0.5, 0.5)});
  m.gamma = Curve::scalar_poly({u(0.5, 1.0)});
  m.g0 = Curve::scalar_poly({u(-0.5, 0.5)});
  m.horizon = horizon;
  return m;
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace svlq::testing

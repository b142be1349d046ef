#pragma once

#include "svlq/kernels.hpp"
#include "svlq/model.hpp"
#include "svlq/riccati.hpp"

#include <memory>
#include <string>
#include <vector>

namespace svlq {

/// Optimal feedback a*(t, Y) = -N^^{-1} (h + sum_i S_i c_i Y^i) built from a
/// Riccati solution, plus the value process it certifies.
///
/// Between grid points the gains of the left endpoint are used.
class FeedbackPolicy {
 public:
  FeedbackPolicy(std::shared_ptr<const RiccatiSolution> solution, DiscreteMeasure measure, ModelCoefficients model);

  const RiccatiSolution& solution() const { return *solution_; }
  const DiscreteMeasure& measure() const { return measure_; }
  const ModelCoefficients& model() const { return model_; }

  // Grid index used at time t: floor(t / dt). Throws ValidationError for t
  // outside [0, T].
  std::size_t index(double t) const;
  // m x (n d') gain and offset at grid point k: a = gain * Y + offset.
  const Mat& gain(std::size_t k) const { return gains_[k]; }
  const Vec& offset(std::size_t k) const { return offsets_[k]; }

  Vec control_at(std::size_t k, const Vec& y) const { return gains_[k] * y + offsets_[k]; }
  // Checked entry points: y must hold n d' entries.
  Vec control(double t, const Vec& y) const;

  // Y' [c_i' Gamma_ij c_j] Y + 2 sum_i Lambda_i' c_i Y^i + chi at grid point k.
  double value_at(std::size_t k, const Vec& y) const;
  double value(double t, const Vec& y) const;

  // Columns t, gain_<r>_<c>..., offset_<r>...; every `stride`-th grid time.
  void write_gains_csv(const std::string& path, std::size_t stride = 1) const;

 private:
  std::shared_ptr<const RiccatiSolution> solution_;
  DiscreteMeasure measure_;
  ModelCoefficients model_;
  std::vector<Mat> gains_;
  std::vector<Vec> offsets_;

  void check_factors(const Vec& y) const;
};

}  // namespace svlq

#include "svlq/policy.hpp"

#include "svlq/csv.hpp"

#include <algorithm>
#include <cmath>

namespace svlq {

FeedbackPolicy::FeedbackPolicy(std::shared_ptr<const RiccatiSolution> solution, DiscreteMeasure measure,
                               ModelCoefficients model)
    : solution_(std::move(solution)), measure_(std::move(measure)), model_(std::move(model)) {
  if (!solution_) throw ValidationError("solution_present", "feedback policy needs a Riccati solution");
  if (solution_->blocks() != static_cast<Index>(measure_.size()) ||
      solution_->block_size() != model_.state_dim() || measure_.cols() != model_.noise_dim())
    throw ValidationError("dimensions", "Riccati solution does not match the measure and model");
  const Index n = static_cast<Index>(measure_.size());
  const Index d = model_.state_dim();
  const Index dp = model_.noise_dim();
  const Index m = model_.control_dim();
  const std::size_t K = solution_->times().size();
  gains_.resize(K);
  offsets_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const Mat& S = solution_->S(k);
    Mat sc(m, n * dp);
    for (Index i = 0; i < n; ++i)
      sc.middleCols(i * dp, dp) = S.middleCols(i * d, d) * measure_.weight(static_cast<std::size_t>(i));
    const Eigen::LDLT<Mat> ldlt(solution_->nhat(k));
    gains_[k] = -ldlt.solve(sc);
    offsets_[k] = -ldlt.solve(solution_->h(k));
  }
}

std::size_t FeedbackPolicy::index(double t) const {
  const std::size_t last = solution_->steps();
  const double T = solution_->horizon();
  if (!(t >= -1e-12 * T && t <= T * (1.0 + 1e-12)))
    throw ValidationError("time_domain", "policy time must lie in [0, T]");
  if (!(t > 0.0)) return 0;
  const double pos = std::floor(t / solution_->dt() + 1e-9);
  if (pos >= static_cast<double>(last)) return last;
  return static_cast<std::size_t>(pos);
}

void FeedbackPolicy::check_factors(const Vec& y) const {
  if (y.size() != static_cast<Index>(measure_.size()) * model_.noise_dim())
    throw ValidationError("dimensions", "factor vector must hold n d' entries");
}

Vec FeedbackPolicy::control(double t, const Vec& y) const {
  check_factors(y);
  return control_at(index(t), y);
}

double FeedbackPolicy::value(double t, const Vec& y) const {
  check_factors(y);
  return value_at(index(t), y);
}

double FeedbackPolicy::value_at(std::size_t k, const Vec& y) const {
  const Index n = static_cast<Index>(measure_.size());
  const Index d = model_.state_dim();
  const Index dp = model_.noise_dim();
  const Mat& G = solution_->gamma(k);
  const Vec& L = solution_->lambda(k);
  // z_i = c_i Y^i, so the quadratic form is sum_ij z_i' Gamma_ij z_j.
  Vec z(n * d);
  for (Index i = 0; i < n; ++i)
    z.segment(i * d, d) = measure_.weight(static_cast<std::size_t>(i)) * y.segment(i * dp, dp);
  return z.dot(G * z) + 2.0 * L.dot(z) + solution_->chi(k);
}

void FeedbackPolicy::write_gains_csv(const std::string& path, std::size_t stride) const {
  if (stride == 0) stride = 1;
  const Index m = model_.control_dim();
  const Index cols = gains_.empty() ? 0 : gains_.front().cols();
  std::vector<std::string> header{"t"};
  for (Index r = 0; r < m; ++r)
    for (Index c = 0; c < cols; ++c) header.push_back("gain_" + std::to_string(r + 1) + "_" + std::to_string(c + 1));
  for (Index r = 0; r < m; ++r) header.push_back("offset_" + std::to_string(r + 1));
  csv::Table table(std::move(header));
  for (std::size_t k = 0; k < gains_.size(); ++k) {
    if (k % stride != 0 && k + 1 != gains_.size()) continue;
    std::vector<std::string> row{csv::format_double(solution_->time(k))};
    for (Index r = 0; r < m; ++r)
      for (Index c = 0; c < cols; ++c) row.push_back(csv::format_double(gains_[k](r, c)));
    for (Index r = 0; r < m; ++r) row.push_back(csv::format_double(offsets_[k](r)));
    table.add_row(std::move(row));
  }
  table.write(path);
}

}  // namespace svlq

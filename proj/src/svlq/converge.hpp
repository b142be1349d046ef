#pragma once

#include "svlq/kernels.hpp"
#include "svlq/model.hpp"
#include "svlq/riccati.hpp"

#include <optional>
#include <string>
#include <vector>

namespace svlq {

struct SweepEntry {
  int n = 0;
  double ratio = 0.0;     // r_n > 1
  double g0_shift = 0.0;  // constant added to every component of g0
};

// r_n = 1 + 2 / sqrt(n), which decreases to 1 while n ln r_n grows.
std::vector<SweepEntry> default_schedule(const std::vector<int>& ns);

struct SweepOptions {
  RiccatiOptions riccati;
  unsigned threads = 1;
  // Exact V_0 when known; otherwise the row with the largest n is the reference.
  std::optional<double> reference_value;
};

struct SweepRow {
  int n = 0;
  double ratio = 0.0;
  double kernel_error = 0.0;  // ||K^n - K||_{L2(0,T)}
  double g0_error = 0.0;      // ||g0^n - g0||_{L2(0,T)}
  double value = 0.0;         // V_0^n = chi_0^n
  double value_error = 0.0;   // |V_0^n - V_0^ref|
  double error_ratio = 0.0;   // value_error / (kernel_error + g0_error); NaN when undefined
};

struct SweepTable {
  std::vector<SweepRow> rows;
  double reference_value = 0.0;
  std::string reference;  // "finest_row" or "given"

  void write_csv(const std::string& path) const;
};

// Atoms used for row n: closed-form fractional and gamma atoms, the spec's own
// atoms for atomic kernels, barycentric discretization on the geometric
// partition otherwise.
DiscreteMeasure sweep_measure(const KernelSpec& spec, int n, double ratio);

// One Riccati solve per schedule entry; rows come back in schedule order.
SweepTable value_sweep(const KernelSpec& spec, const ModelCoefficients& model, const std::vector<SweepEntry>& schedule,
                       const SweepOptions& options = {});

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t used_rows = 0;
};

// Least squares of log value_error against log(kernel_error + g0_error), rows
// with a zero on either side skipped. Needs at least three rows, and at least
// two usable rows with distinct inputs.
RateFit fit_rate(const SweepTable& table);

}  // namespace svlq

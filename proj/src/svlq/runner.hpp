#pragma once

#include "svlq/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace svlq {

struct RunRequest {
  std::string config_path;
  std::optional<std::string> out_dir;  // takes precedence over OUT_DIR and the config
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

struct RunResult {
  std::string run_dir;
  nlohmann::json summary;
  // Set when the run finished but a checked property failed (the verification
  // identity); artifacts are still written.
  std::optional<std::string> failed_invariant;
};

// Builds the measure a config describes: atoms as given, closed-form atoms for
// fractional and gamma kernels, or barycentric atoms on an explicit partition.
DiscreteMeasure build_measure(const RunConfig& cfg, const KernelSpec& spec);

// Volterra-noise regulator: X = int a ds + int K~(t-s) dW written with the row
// kernel (1, K~), measure delta_0 (1, 0) plus the atoms (0, c~_i) of K~.
DiscreteMeasure regulator_measure(const DiscreteMeasure& noise);
ModelCoefficients regulator_model(double q, double n, double horizon);

// Executes the task of `cfg` writing artifacts into `run_dir`, which must exist.
RunResult execute(const RunConfig& cfg, const std::string& run_dir);

// Loads and validates the config, creates <out>/<task>/<timestamp>/, writes
// the resolved config there and executes.
RunResult run(const RunRequest& request);

}  // namespace svlq

#pragma once

#include "svlq/kernels.hpp"
#include "svlq/model.hpp"
#include "svlq/riccati.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace svlq {

enum class Task { Riccati, Value, Simulate, Verify, Converge, DemoRegulator };

Task parse_task(const std::string& name);
std::string task_name(Task t);

struct KernelConfig {
  std::string type = "atomic";  // fractional | gamma | atomic | atoms_csv
  double hurst = 0.5;
  double damping = 0.0;
  std::vector<Atom> atoms;
  std::string atoms_csv;
};

struct DiscretizationConfig {
  int n = 20;
  double ratio = 2.5;
  std::vector<double> partition;  // when set, barycentric discretization on it
};

struct SimulationConfig {
  std::size_t paths = 10000;
  std::size_t steps = 500;
  std::uint64_t seed = 42;
  std::size_t record_paths = 10;
  std::string control = "feedback";  // feedback | zero | open_loop
  Curve control_curve;               // open-loop control
  Curve perturbation;                // added to the feedback
};

struct ConvergeConfig {
  std::vector<int> ns{5, 10, 20, 40};
  std::vector<double> ratios;  // empty: 1 + 2 / sqrt(n)
  std::string g0_shift = "none";  // none | inverse_n
  std::optional<double> reference_value;
};

/// Fully resolved run description; every field has a value after parsing.
struct RunConfig {
  Task task = Task::Riccati;
  KernelConfig kernel;
  std::string model_preset = "intro";
  ModelCoefficients model;
  DiscretizationConfig discretization;
  RiccatiOptions solver;
  std::size_t csv_stride = 0;  // 0: choose so that about 200 grid times are written
  SimulationConfig simulation;
  ConvergeConfig converge;
  unsigned threads = 1;
  std::string output_dir = "runs";
};

// Throws ValidationError naming the offending field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
nlohmann::json resolved_json(const RunConfig& cfg);

// Validates and builds the kernel spec of the config.
KernelSpec build_kernel(const RunConfig& cfg);

nlohmann::json matrix_json(const Mat& m);
nlohmann::json curve_json(const Curve& c);

}  // namespace svlq

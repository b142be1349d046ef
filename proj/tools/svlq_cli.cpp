#include "svlq/svlq.h"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Linear-quadratic control of stochastic Volterra equations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", svlq_version());

  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  CLI::App* run = app.add_subcommand("run", "Run the task described by a JSON config");
  run->add_option("--config", config, "Path to the run config")->required();
  run->add_option("--out", out, "Output root (overrides OUT_DIR and the config)");
  run->add_option("--seed", seed, "Simulation seed override");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : SVLQ_ERR_VALIDATION;
  }

  char run_dir[4096] = {0};
  const std::uint64_t seed_value = seed.value_or(0);
  const svlq_status st = svlq_run_config(config.c_str(), out.empty() ? nullptr : out.c_str(),
                                         seed ? &seed_value : nullptr, threads, run_dir, sizeof run_dir);
  if (run_dir[0]) std::cout << run_dir << "\n";
  if (st == SVLQ_OK) return 0;
  std::cerr << "error [" << svlq_last_invariant() << "]: " << svlq_last_error() << "\n";
  switch (st) {
    case SVLQ_ERR_VALIDATION:
    case SVLQ_ERR_ARGUMENT: return 2;
    case SVLQ_ERR_NUMERICAL: return 3;
    default: return 1;
  }
}

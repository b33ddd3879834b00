#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "umpire/baselines.hpp"
#include "umpire/evaluate.hpp"
#include "umpire/kernel.hpp"

namespace umpire {

/**
 * Fully resolved run parameters. Precedence when building one: built-in
 * defaults, then a config file (--config flag, falling back to the
 * UMPIRE_CONFIG environment variable), then command-line flags. Every
 * command embeds the resolved values in its output or a .meta.json sidecar.
 */
struct RunConfig {
  // kernel
  double epsilon = 1e-8;
  double alpha = 0.0;
  bool adaptive = false;   // derive alpha from the input, label-free
  double fraction = 0.05;  // subset fraction for adaptive alpha
  bool length_normalized = false;

  // baselines (comma list; "none" disables)
  std::string baselines = "eigenscore,ln_entropy";
  double eigen_jitter = 1e-8;

  // evaluation
  int bins_cpc = 50;
  int bins_ece = 15;
  double dev_fraction = 0.05;
  std::vector<double> fpr = {0.10, 0.01};
  std::array<double, 3> weights = {1.0, 1.0, 1.0};
  std::string metric_column = "v";

  // sweep / synth
  std::vector<double> grid;
  std::string preset = "planted-benchmark";
  std::string spec_file;
  long n = 400;
  long k = 12;
  double wrong_fraction = 0.5;

  // run
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = hardware concurrency

  KernelConfig kernel_config() const;
  EvalConfig eval_config() const;
  BaselineSelection baseline_selection() const;
};

// Parse arguments, dispatch the subcommand, and map failures to exit codes:
// 0 success, 1 invalid input or configuration, 2 numerical failure,
// 3 unexpected error.
int run_cli(int argc, const char* const* argv);

}  // namespace umpire

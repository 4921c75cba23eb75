// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: configuration parsing, presets, and the four
// subcommands (simulate, optimize, sweep, compare).

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scrapopt/model.hpp"
#include "scrapopt/optimizer.hpp"
#include "scrapopt/pulses.hpp"
#include "scrapopt/sweep.hpp"

namespace scrapopt::cli {

// Invalid or unparseable configuration; mapped to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GreedyConfig {
  std::vector<DetuningPoint> candidates;
  int budget = 1;
};

struct Table1Params {
  double tau_p = -1.0;
  double tau_s = -2.0;
  double t_p = 1.0;
  double t_s = 1.0;
  double t_st = 2.0;
};

// Fully resolved run configuration. Parsing is fail-closed: unknown keys in
// the JSON config are rejected, and the pulse source is resolved eagerly so
// every error surfaces before computation starts.
struct RunConfig {
  SystemParams system;
  std::string pulse_kind = "table1";  // table1 | reference | terms | file
  Table1Params table1;
  PulseSet pulses;  // resolved pulse set
  int initial_state = 1;
  DetuningGrid grid;  // defaults to default_grid()
  OptimizerOptions optimizer;
  std::vector<DetuningPoint> detuning_points;
  std::optional<GreedyConfig> greedy;
  std::uint64_t seed = 0;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Built-in configurations: "fig2", "fig3", "fig4-points", "decay-diagnostic".
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// FNV-1a hash of the resolved configuration, hex-encoded; identical configs
// give identical fingerprints, enabling exact reruns.
std::string config_fingerprint(const RunConfig& config);
std::string pulse_fingerprint(const PulseSet& pulses);

// Subcommands. Each writes its files under out_dir and returns 0 on success;
// errors are reported via exceptions and mapped to exit codes by run_cli.
int cmd_simulate(const RunConfig& config, const std::string& out_dir);
int cmd_optimize(const RunConfig& config, const std::string& out_dir);
int cmd_sweep(const RunConfig& config, const std::string& out_dir);
int cmd_compare(const std::string& before_csv, const std::string& after_csv,
                const std::string& out_dir);

// Full argument parsing and dispatch. Exit codes: 0 success, 2 configuration
// or usage error, 3 numerical failure or undefined metric.
int run_cli(int argc, const char* const* argv);

}  // namespace scrapopt::cli

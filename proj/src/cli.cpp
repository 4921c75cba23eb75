// Copyright (c) 2026 the scrapopt authors.
// SPDX-License-Identifier: Apache-2.0

#include "scrapopt/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "scrapopt/dynamics.hpp"
#include "scrapopt/util.hpp"

namespace scrapopt::cli {

using json = nlohmann::ordered_json;

namespace {

void reject_unknown_keys(const json& object, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (const auto& item : object.items())
    if (!allowed.contains(item.key()))
      throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
}

double get_double(const json& object, const char* key, double fallback) {
  if (!object.contains(key)) return fallback;
  if (!object.at(key).is_number())
    throw ConfigError(std::string("key \"") + key + "\" must be a number");
  return object.at(key).get<double>();
}

int get_int(const json& object, const char* key, int fallback) {
  if (!object.contains(key)) return fallback;
  if (!object.at(key).is_number_integer())
    throw ConfigError(std::string("key \"") + key + "\" must be an integer");
  return object.at(key).get<int>();
}

SystemParams parse_system(const json& object) {
  reject_unknown_keys(object, "system",
                      {"delta_p", "delta_s", "gamma", "omega0_cap", "s0_cap",
                       "t_start", "t_end", "n_steps"});
  SystemParams params;
  params.delta_p = get_double(object, "delta_p", params.delta_p);
  params.delta_s = get_double(object, "delta_s", params.delta_s);
  params.gamma = get_double(object, "gamma", params.gamma);
  params.omega0_cap = get_double(object, "omega0_cap", params.omega0_cap);
  params.s0_cap = get_double(object, "s0_cap", params.s0_cap);
  params.t_start = get_double(object, "t_start", params.t_start);
  params.t_end = get_double(object, "t_end", params.t_end);
  params.n_steps = get_int(object, "n_steps", params.n_steps);
  return params;
}

std::vector<GaussianTerm> parse_terms(const json& array, const std::string& where) {
  if (!array.is_array()) throw ConfigError(where + " must be an array");
  std::vector<GaussianTerm> terms;
  for (const auto& entry : array) {
    if (!entry.is_array() || entry.size() != 3)
      throw ConfigError(where + " entries must be [h, tau, sigma] triples");
    terms.push_back({entry[0].get<double>(), entry[1].get<double>(),
                     entry[2].get<double>()});
  }
  return terms;
}

PulseSet parse_pulse_terms(const json& object, const std::string& where) {
  reject_unknown_keys(object, where, {"pump", "stokes", "stark"});
  PulseSet set;
  for (const auto k : kControls) {
    const char* name = to_string(k);
    if (!object.contains(name))
      throw ConfigError(where + " is missing control \"" + name + "\"");
    set[k] = parse_terms(object.at(name), where + "." + name);
  }
  return set;
}

PulseSet load_pulse_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open pulse file: " + path);
  json root = json::parse(file, nullptr, true);
  const json& object = root.contains("pulses") ? root.at("pulses") : root;
  return parse_pulse_terms(object, "pulse file " + path);
}

std::vector<DetuningPoint> parse_points(const json& array, const std::string& where) {
  if (!array.is_array()) throw ConfigError(where + " must be an array");
  std::vector<DetuningPoint> points;
  for (const auto& entry : array) {
    if (!entry.is_array() || entry.size() != 2)
      throw ConfigError(where + " entries must be [delta_p, delta_s] pairs");
    points.emplace_back(entry[0].get<double>(), entry[1].get<double>());
  }
  return points;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ConfigError("grid axis needs at least one point");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo + i * ((hi - lo) / (n - 1));
  return out;
}

DetuningGrid parse_grid(const json& object) {
  if (object.contains("x_axis") || object.contains("y_axis")) {
    reject_unknown_keys(object, "grid", {"x_axis", "y_axis"});
    DetuningGrid grid;
    grid.x_axis = object.at("x_axis").get<std::vector<double>>();
    grid.y_axis = object.at("y_axis").get<std::vector<double>>();
    return grid;
  }
  reject_unknown_keys(object, "grid",
                      {"x_min", "x_max", "nx", "y_min", "y_max", "ny"});
  DetuningGrid grid;
  grid.x_axis = linspace(get_double(object, "x_min", -80.0),
                         get_double(object, "x_max", -2.0),
                         get_int(object, "nx", 60));
  grid.y_axis = linspace(get_double(object, "y_min", 2.0),
                         get_double(object, "y_max", 120.0),
                         get_int(object, "ny", 60));
  return grid;
}

OptimizerOptions parse_optimizer(const json& object) {
  reject_unknown_keys(object, "optimizer",
                      {"max_iters", "memory", "grad_tol", "phi_tol", "kappa",
                       "sigma_lower_factor", "sigma_upper_factor", "penalty_beta"});
  OptimizerOptions options;
  options.max_iters = get_int(object, "max_iters", options.max_iters);
  options.memory = get_int(object, "memory", options.memory);
  options.grad_tol = get_double(object, "grad_tol", options.grad_tol);
  options.phi_tol = get_double(object, "phi_tol", options.phi_tol);
  options.kappa = get_double(object, "kappa", options.kappa);
  options.sigma_lower_factor =
      get_double(object, "sigma_lower_factor", options.sigma_lower_factor);
  options.sigma_upper_factor =
      get_double(object, "sigma_upper_factor", options.sigma_upper_factor);
  options.penalty_beta = get_double(object, "penalty_beta", options.penalty_beta);
  return options;
}

json terms_to_json(const PulseSet& pulses) {
  json object;
  for (const auto k : kControls) {
    json rows = json::array();
    for (const auto& term : pulses[k])
      rows.push_back(json::array({term.h, term.tau, term.sigma}));
    object[to_string(k)] = rows;
  }
  return object;
}

json canonical_json(const RunConfig& config) {
  json root;
  root["system"] = {{"delta_p", config.system.delta_p},
                    {"delta_s", config.system.delta_s},
                    {"gamma", config.system.gamma},
                    {"omega0_cap", config.system.omega0_cap},
                    {"s0_cap", config.system.s0_cap},
                    {"t_start", config.system.t_start},
                    {"t_end", config.system.t_end},
                    {"n_steps", config.system.n_steps}};
  root["pulses"] = terms_to_json(config.pulses);
  root["initial_state"] = config.initial_state;
  root["grid"] = {{"x_axis", config.grid.x_axis}, {"y_axis", config.grid.y_axis}};
  root["optimizer"] = {{"max_iters", config.optimizer.max_iters},
                       {"memory", config.optimizer.memory},
                       {"grad_tol", config.optimizer.grad_tol},
                       {"phi_tol", config.optimizer.phi_tol},
                       {"kappa", config.optimizer.kappa},
                       {"sigma_lower_factor", config.optimizer.sigma_lower_factor},
                       {"sigma_upper_factor", config.optimizer.sigma_upper_factor},
                       {"penalty_beta", config.optimizer.penalty_beta}};
  json points = json::array();
  for (const auto& p : config.detuning_points)
    points.push_back(json::array({p.first, p.second}));
  root["detuning_points"] = points;
  if (config.greedy) {
    json candidates = json::array();
    for (const auto& p : config.greedy->candidates)
      candidates.push_back(json::array({p.first, p.second}));
    root["greedy"] = {{"candidates", candidates}, {"budget", config.greedy->budget}};
  }
  root["seed"] = config.seed;
  return root;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  file << text;
  if (!file) throw std::runtime_error("write failed: " + path);
}

DensityMatrix initial_state_of(const RunConfig& config) {
  return DensityMatrix::pure(config.initial_state);
}

OptimizationProblem problem_of(const RunConfig& config) {
  OptimizationProblem problem;
  problem.base = config.system;
  problem.detuning_points = config.detuning_points;
  problem.initial = config.pulses;
  problem.options = config.optimizer;
  return problem;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(root, "config",
                      {"system", "pulses", "initial_state", "grid", "optimizer",
                       "detuning_points", "greedy", "table1", "seed"});

  RunConfig config;
  try {
    if (root.contains("system")) config.system = parse_system(root.at("system"));
    config.system.validate();

    if (root.contains("table1")) {
      reject_unknown_keys(root.at("table1"), "table1",
                          {"tau_p", "tau_s", "t_p", "t_s", "t_st"});
      const json& object = root.at("table1");
      config.table1.tau_p = get_double(object, "tau_p", config.table1.tau_p);
      config.table1.tau_s = get_double(object, "tau_s", config.table1.tau_s);
      config.table1.t_p = get_double(object, "t_p", config.table1.t_p);
      config.table1.t_s = get_double(object, "t_s", config.table1.t_s);
      config.table1.t_st = get_double(object, "t_st", config.table1.t_st);
    }

    json pulse_spec = "table1";
    if (root.contains("pulses")) pulse_spec = root.at("pulses");
    if (pulse_spec.is_string()) {
      config.pulse_kind = pulse_spec.get<std::string>();
    } else if (pulse_spec.is_object()) {
      reject_unknown_keys(pulse_spec, "pulses", {"kind", "path", "terms"});
      config.pulse_kind = pulse_spec.value("kind", std::string("terms"));
    } else {
      throw ConfigError("pulses must be a string or an object");
    }

    if (config.pulse_kind == "table1") {
      config.pulses = standard_scrap_pulses(
          config.system.omega0_cap, config.system.s0_cap, config.table1.tau_p,
          config.table1.tau_s, config.table1.t_p, config.table1.t_s,
          config.table1.t_st);
    } else if (config.pulse_kind == "reference") {
      config.pulses = reference_pulse_set(
          config.system.omega0_cap, config.system.s0_cap, config.table1.tau_p,
          config.table1.tau_s, config.table1.t_p, config.table1.t_s,
          config.table1.t_st);
    } else if (config.pulse_kind == "terms") {
      if (!pulse_spec.is_object() || !pulse_spec.contains("terms"))
        throw ConfigError("pulses kind \"terms\" needs a terms object");
      config.pulses = parse_pulse_terms(pulse_spec.at("terms"), "pulses.terms");
    } else if (config.pulse_kind == "file") {
      if (!pulse_spec.is_object() || !pulse_spec.contains("path"))
        throw ConfigError("pulses kind \"file\" needs a path");
      config.pulses = load_pulse_file(pulse_spec.at("path").get<std::string>());
    } else {
      throw ConfigError("unknown pulses kind \"" + config.pulse_kind + "\"");
    }
    config.pulses.validate();

    if (root.contains("initial_state")) {
      const std::string name = root.at("initial_state").get<std::string>();
      if (name == "state1")
        config.initial_state = 1;
      else if (name == "state2")
        config.initial_state = 2;
      else if (name == "state3")
        config.initial_state = 3;
      else
        throw ConfigError("initial_state must be state1, state2 or state3");
    }

    config.grid = root.contains("grid") ? parse_grid(root.at("grid"))
                                        : default_grid();
    config.grid.validate();

    if (root.contains("optimizer"))
      config.optimizer = parse_optimizer(root.at("optimizer"));
    if (root.contains("detuning_points"))
      config.detuning_points =
          parse_points(root.at("detuning_points"), "detuning_points");
    if (root.contains("greedy")) {
      const json& object = root.at("greedy");
      reject_unknown_keys(object, "greedy", {"candidates", "budget"});
      GreedyConfig greedy;
      if (!object.contains("candidates"))
        throw ConfigError("greedy needs a candidates list");
      greedy.candidates = parse_points(object.at("candidates"), "greedy.candidates");
      greedy.budget = get_int(object, "budget", greedy.budget);
      config.greedy = greedy;
    }
    if (root.contains("seed")) {
      if (!root.at("seed").is_number_unsigned())
        throw ConfigError("seed must be a non-negative integer");
      config.seed = root.at("seed").get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config_text(buffer.str());
}

std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig4-points", "decay-diagnostic"};
}

RunConfig preset_config(const std::string& name) {
  if (name == "fig2") {
    return parse_config_text(R"({
      "system": {"delta_p": 30, "delta_s": 45, "gamma": 0},
      "pulses": "reference",
      "detuning_points": [[30, 45]]
    })");
  }
  if (name == "fig3") {
    return parse_config_text(R"({
      "system": {"delta_p": 30, "delta_s": 45, "gamma": 1},
      "pulses": "table1"
    })");
  }
  if (name == "fig4-points") {
    return parse_config_text(R"({
      "system": {"delta_p": 30, "delta_s": 45, "gamma": 1},
      "pulses": "table1",
      "detuning_points": [[30, 45], [70, 90], [20, 60], [100, 130], [50, 110], [10, 20]]
    })");
  }
  if (name == "decay-diagnostic") {
    return parse_config_text(R"({
      "system": {"delta_p": 30, "delta_s": 45, "gamma": 1,
                 "t_start": -2, "t_end": 2, "n_steps": 400},
      "pulses": {"kind": "terms", "terms": {
        "pump": [[0, 0, 1]], "stokes": [[0, 0, 1]], "stark": [[0, 0, 1]]}},
      "initial_state": "state2"
    })");
  }
  throw ConfigError("unknown preset \"" + name + "\"");
}

std::string config_fingerprint(const RunConfig& config) {
  return to_hex(fnv1a64(canonical_json(config).dump()));
}

std::string pulse_fingerprint(const PulseSet& pulses) {
  std::string blob;
  for (const double v : pack_parameters(pulses)) {
    blob += format_g17(v);
    blob += ',';
  }
  return to_hex(fnv1a64(blob));
}

int cmd_simulate(const RunConfig& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto schedule = sample_schedule(config.pulses, config.system);
  const PropagationRecord record =
      propagate(initial_state_of(config), schedule, config.system);
  const auto rows = population_trace(record);
  {
    std::ofstream file(out_dir + "/trace.csv");
    if (!file) throw std::runtime_error("cannot open for writing: trace.csv");
    write_population_trace_csv(file, rows);
  }

  const Vector3d& final_pop = record.populations.back();
  json report;
  report["p1_final"] = final_pop(0);
  report["p2_final"] = final_pop(1);
  report["p3_final"] = final_pop(2);
  report["phi0"] = final_pop(2);
  report["trace_final"] = record.rho.back().trace_real();
  report["config_fingerprint"] = config_fingerprint(config);
  std::cout << report.dump() << '\n';
  return 0;
}

int cmd_optimize(const RunConfig& config, const std::string& out_dir) {
  if (config.detuning_points.empty() && !config.greedy)
    throw ConfigError("optimize needs detuning_points or a greedy block");
  std::filesystem::create_directories(out_dir);

  OptimizationProblem problem = problem_of(config);
  OptimizeResult result;
  json greedy_meta;
  if (config.greedy) {
    const GreedyResult greedy = greedy_point_selection(
        problem, config.greedy->candidates, config.grid, config.greedy->budget,
        config.seed);
    result = greedy.best;
    json points = json::array();
    for (const auto& p : greedy.points)
      points.push_back(json::array({p.first, p.second}));
    greedy_meta = {{"points", points}, {"scores", greedy.scores}};
  } else {
    result = optimize(problem);
  }

  const std::vector<double> x0 = pack_parameters(problem.initial);
  const std::vector<double> x1 = pack_parameters(result.pulses);
  const ParameterBounds box = problem.bounds();
  const int q = problem.initial.q();
  json parameters = json::array();
  static const char* kSlots[3] = {"h", "tau", "sigma"};
  for (size_t i = 0; i < x1.size(); ++i) {
    const int control = static_cast<int>(i) / (3 * q);
    json entry;
    entry["control"] = to_string(static_cast<Control>(control));
    entry["index"] = (static_cast<int>(i) / 3) % q;
    entry["name"] = kSlots[i % 3];
    entry["initial"] = x0[i];
    entry["lower"] = box.lower[i];
    entry["upper"] = box.upper[i];
    entry["final"] = x1[i];
    parameters.push_back(entry);
  }

  json report;
  report["config_fingerprint"] = config_fingerprint(config);
  report["pulse_fingerprint"] = pulse_fingerprint(result.pulses);
  report["initial_phi"] = result.initial_phi;
  report["final_phi"] = result.final_phi;
  report["stop_reason"] = result.stop_reason;
  report["evaluations"] = result.evaluations;
  report["iterations"] = static_cast<int>(result.trace.size());
  if (!greedy_meta.is_null()) report["greedy"] = greedy_meta;
  report["parameters"] = parameters;
  report["pulses"] = terms_to_json(result.pulses);
  write_text_file(out_dir + "/pulses_opt.json", report.dump(2) + "\n");

  std::string trace_lines;
  for (const auto& stat : result.trace) {
    json line;
    line["iter"] = stat.iter;
    line["phi"] = stat.phi;
    line["grad_norm"] = stat.grad_norm;
    line["max_envelope_p"] = stat.max_envelope_p;
    line["max_envelope_s"] = stat.max_envelope_s;
    line["max_envelope_st"] = stat.max_envelope_st;
    trace_lines += line.dump() + "\n";
  }
  write_text_file(out_dir + "/trace.jsonl", trace_lines);

  json summary = {{"initial_phi", result.initial_phi},
                  {"final_phi", result.final_phi},
                  {"stop_reason", result.stop_reason}};
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_sweep(const RunConfig& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const FidelityMap map = fidelity_map(config.pulses, config.grid, config.system);
  write_map_csv(map, out_dir + "/map.csv");

  json meta;
  meta["config_fingerprint"] = config_fingerprint(config);
  meta["pulse_fingerprint"] = pulse_fingerprint(config.pulses);
  meta["grid"] = {{"x_axis", map.grid.x_axis}, {"y_axis", map.grid.y_axis}};
  meta["gamma"] = config.system.gamma;
  meta["a_above_0p8"] = area_above(map, 0.8);
  meta["f_mean"] = mean_fidelity(map);
  meta["nan_count"] = map.nan_count();
  write_text_file(out_dir + "/map.meta.json", meta.dump(2) + "\n");

  json summary = {{"a_above_0p8", meta["a_above_0p8"]},
                  {"f_mean", meta["f_mean"]},
                  {"nan_count", meta["nan_count"]}};
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_compare(const std::string& before_csv, const std::string& after_csv,
                const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  FidelityMap before, after;
  try {
    before = read_map_csv(before_csv);
    after = read_map_csv(after_csv);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  LogIncreaseMap increase;
  try {
    increase = log_increase_map(before, after);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_log_increase_csv(increase, out_dir + "/log_increase.csv");

  int increased = 0, unchanged = 0, decreased = 0;
  for (int i = 0; i < increase.sign.rows(); ++i)
    for (int j = 0; j < increase.sign.cols(); ++j) {
      if (increase.sign(i, j) > 0)
        ++increased;
      else if (increase.sign(i, j) < 0)
        ++decreased;
      else
        ++unchanged;
    }

  const double f_before = mean_fidelity(before);
  const double f_after = mean_fidelity(after);
  const double a_before = area_above(before, 0.8);
  const double a_after = area_above(after, 0.8);
  json report;
  report["f_mean_before"] = f_before;
  report["f_mean_after"] = f_after;
  report["f_mean_rel_gain"] =
      f_before > 0 ? json((f_after - f_before) / f_before) : json();
  report["a_above_0p8_before"] = a_before;
  report["a_above_0p8_after"] = a_after;
  report["a_above_0p8_rel_gain"] =
      a_before > 0 ? json((a_after - a_before) / a_before) : json();
  report["cells"] = {{"increased", increased},
                     {"unchanged", unchanged},
                     {"decreased", decreased}};
  write_text_file(out_dir + "/compare.json", report.dump(2) + "\n");
  std::cout << report.dump() << '\n';
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Stark-chirped rapid adiabatic passage: simulation, pulse "
               "optimization and detuning sweeps"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir = ".";
  std::string before_csv, after_csv;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;

  app.add_option("--threads", threads, "cap the worker thread count");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--preset", preset, "built-in configuration name");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "tie-break seed")
        ->each([&](const std::string&) { seed_given = true; });
  };

  CLI::App* simulate = app.add_subcommand("simulate", "propagate one configuration");
  CLI::App* optimize = app.add_subcommand("optimize", "optimize pulse parameters");
  CLI::App* sweep = app.add_subcommand("sweep", "fidelity map over a detuning grid");
  for (CLI::App* sub : {simulate, optimize, sweep}) add_common(sub);

  CLI::App* compare = app.add_subcommand("compare", "log-increase between two maps");
  compare->add_option("--before", before_csv, "baseline map CSV")->required();
  compare->add_option("--after", after_csv, "improved map CSV")->required();
  compare->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (compare->parsed()) return cmd_compare(before_csv, after_csv, out_dir);

    if (config_path.empty() == preset.empty())
      throw ConfigError("exactly one of --config or --preset is required");
    RunConfig config = config_path.empty() ? preset_config(preset)
                                           : load_config_file(config_path);
    if (seed_given) config.seed = seed;

    if (simulate->parsed()) return cmd_simulate(config, out_dir);
    if (optimize->parsed()) return cmd_optimize(config, out_dir);
    return cmd_sweep(config, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const UndefinedMetricError& e) {
    std::cerr << "undefined metric: " << e.what() << '\n';
    return 3;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace scrapopt::cli

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "swipt/config.hpp"
#include "swipt/error.hpp"
#include "swipt/oracle.hpp"

using namespace swipt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitConfig = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Infeasible: return kExitInfeasible;
    case ErrorKind::NonConvergence:
    case ErrorKind::Pole: return kExitNonConvergence;
    case ErrorKind::InvalidInput: return kExitConfig;
  }
  return kExitConfig;
}

int report_error(const std::string& kind, const std::string& message,
                 const std::vector<std::string>& fields, int code) {
  Json e;
  e["error"] = kind;
  e["message"] = message;
  if (!fields.empty()) e["fields"] = fields;
  e["exit_code"] = code;
  std::cerr << e.dump() << "\n";
  return code;
}

// Flag, then the config file's own seed, then SWIPT_SEED.
std::optional<std::uint64_t> resolve_seed(std::optional<std::uint64_t> flag, const Json& config) {
  if (flag) return flag;
  if (config.is_object() && config.contains("seed")) return std::nullopt;
  if (const char* env = std::getenv("SWIPT_SEED")) {
    try {
      std::size_t used = 0;
      const std::string text(env);
      const unsigned long long v = std::stoull(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError({std::string("SWIPT_SEED: expected a non-negative integer, got '") + env + "'"});
  }
  return std::nullopt;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError({path + ": cannot open for writing"});
  out << text;
  if (!out) throw ConfigError({path + ": write failed"});
}

struct ScenarioArgs {
  std::string config;
  std::string mode = "dedicated";
  std::optional<double> rho;
  double grid = 0.01;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_scenario_flags(CLI::App* cmd, ScenarioArgs& a) {
  cmd->add_option("--config", a.config, "scenario JSON (spec or {\"explicit\": ...})")->required();
  cmd->add_option("--mode", a.mode, "dedicated or hybrid")
      ->check(CLI::IsMember({"dedicated", "hybrid"}));
  auto* rho = cmd->add_option("--rho", a.rho, "fixed splitting ratio in (0,1)");
  cmd->add_option("--grid", a.grid, "rho grid step")->excludes(rho);
  cmd->add_option("--seed", a.seed, "channel seed (fallback: config, SWIPT_SEED)");
  cmd->add_option("--out", a.out, "output file (default stdout)");
}

LoadedScenario load(const ScenarioArgs& a, Json& config) {
  config = read_json_file(a.config);
  return load_scenario(config, resolve_seed(a.seed, config));
}

RhoSearchOptions search_options(const ScenarioArgs& a) {
  RhoSearchOptions o;
  o.grid_step = a.grid;
  o.fixed_rho = a.rho;
  return o;
}

Json header(const std::string& command, const LoadedScenario& l) {
  Json j;
  j["command"] = command;
  j["config"] = l.echo;
  j["seed"] = l.seed ? Json(*l.seed) : Json(nullptr);
  return j;
}

int cmd_solve(const ScenarioArgs& a) {
  Json config;
  const LoadedScenario l = load(a, config);
  const HarvestMode mode = harvest_mode_from_string(a.mode);
  const OptimizeResult r = optimize(l.scenario, mode, search_options(a));
  Json j = header("solve", l);
  j["mode"] = a.mode;
  j["rho_search"] = {{"grid_step", a.rho ? Json(nullptr) : Json(a.grid)},
                     {"fixed_rho", a.rho ? Json(*a.rho) : Json(nullptr)}};
  j["result"] = to_json(r.allocation, l.scenario);
  j["rho_report"] = to_json(r.report);
  emit(a.out, j.dump(2) + "\n");
  return kExitOk;
}

struct SweepArgs {
  std::string preset;
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  int jobs = 1;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  SweepConfig cfg;
  Json file = Json::object();
  if (!a.spec.empty()) {
    file = read_json_file(a.spec);
    if (!a.preset.empty()) file["preset"] = a.preset;
    cfg = sweep_config_from_json(file);
  } else {
    try {
      cfg = preset_config(a.preset);
    } catch (const SolverError& e) {
      throw ConfigError({std::string("preset: ") + e.what()});
    }
  }
  const auto seed = resolve_seed(a.seed, file);
  if (seed) cfg.seed = *seed;
  if (a.reps) {
    if (*a.reps < 0) throw ConfigError({"--reps: must be >= 0"});
    cfg.repetitions = *a.reps;
  }
  if (a.jobs < 1) throw ConfigError({"--jobs: must be >= 1"});
  cfg.jobs = a.jobs;
  const SweepTable table = run_sweep(cfg);
  std::ostringstream os;
  write_csv(os, table,
            {"config: " + to_json(cfg).dump(), "seed: " + std::to_string(cfg.seed),
             "columns: kind (rep or mean), series, x, rep (-1 on means), metrics in SI units"});
  emit(a.out, os.str());
  return kExitOk;
}

struct LifetimeArgs {
  std::string config;
  std::vector<double> epsilons{0.01, 0.25, 0.5, 0.75, 1.0};
  long cap = 1000;
  std::optional<std::uint64_t> seed;
  std::string mode = "dedicated";
  std::optional<double> rho;
  double grid = 0.05;
  bool constant_channel = false;
  bool trace = false;
  std::string out;
};

int cmd_lifetime(const LifetimeArgs& a) {
  const Json config = read_json_file(a.config);
  Json spec_json = config;
  std::optional<std::uint64_t> seed = resolve_seed(a.seed, config);
  if (spec_json.is_object() && spec_json.contains("seed")) {
    if (!seed) {
      if (!spec_json["seed"].is_number_unsigned() && !(spec_json["seed"].is_number_integer() &&
                                                       spec_json["seed"].get<long long>() >= 0))
        throw ConfigError({"seed: expected a non-negative integer"});
      seed = spec_json["seed"].get<std::uint64_t>();
    }
    spec_json.erase("seed");
  }
  if (spec_json.is_object() && spec_json.contains("explicit"))
    throw ConfigError({"explicit: lifetime needs a generated scenario spec"});
  if (!seed) throw ConfigError({"seed: required (flag, config or SWIPT_SEED)"});
  const ScenarioSpec spec = scenario_spec_from_json(spec_json);
  if (a.cap < 0) throw ConfigError({"--cap: must be >= 0"});
  LifetimeOptions o;
  o.cap = a.cap;
  o.mode = harvest_mode_from_string(a.mode);
  o.fixed_rho = a.rho;
  o.grid_step = a.grid;
  o.constant_channel = a.constant_channel;
  o.record_trace = a.trace;
  Json j;
  j["command"] = "lifetime";
  Json echo = to_json(spec);
  echo["seed"] = *seed;
  j["config"] = echo;
  j["seed"] = *seed;
  j["options"] = {{"mode", a.mode},
                  {"cap", a.cap},
                  {"fixed_rho", a.rho ? Json(*a.rho) : Json(nullptr)},
                  {"grid_step", a.grid},
                  {"constant_channel", a.constant_channel}};
  Json traces = Json::array();
  for (double eps : a.epsilons) traces.push_back(to_json(simulate_lifetime(spec, eps, *seed, o)));
  j["traces"] = std::move(traces);
  emit(a.out, j.dump(2) + "\n");
  return kExitOk;
}

struct OracleArgs {
  ScenarioArgs scenario;
  double tol = 0.01;
  long points = 200'000;
};

int cmd_oracle_check(const OracleArgs& a) {
  Json config;
  const LoadedScenario l = load(a.scenario, config);
  const SystemScenario& s = l.scenario;
  const HarvestMode mode = harvest_mode_from_string(a.scenario.mode);
  if (!(a.tol >= 0.0)) throw ConfigError({"--tol: must be >= 0"});
  check_oracle_limits(s, mode);
  const OptimizeResult r = optimize(s, mode, search_options(a.scenario));
  const AllocationResult& alloc = r.allocation;
  Json checks = Json::array();
  bool pass = true;
  for (const OracleCheck& c : compare_with_oracle(s, mode, alloc, a.points)) {
    const bool ok = c.oracle.feasible && std::abs(c.relative_gap) <= a.tol;
    pass = pass && ok;
    Json item;
    if (c.user >= 0) item["user"] = c.user; else item["users"] = "all";
    item["solver_objective"] = c.solver_objective;
    item["oracle_objective"] = c.oracle.feasible ? Json(c.oracle.objective) : Json(nullptr);
    item["oracle_feasible"] = c.oracle.feasible;
    item["relative_gap"] = std::isfinite(c.relative_gap) ? Json(c.relative_gap) : Json(nullptr);
    item["grid_points"] = c.oracle.evaluated;
    item["box_upper"] = c.box_upper;
    item["pass"] = ok;
    checks.push_back(std::move(item));
  }
  Json j = header("oracle-check", l);
  j["mode"] = a.scenario.mode;
  j["tolerance"] = a.tol;
  j["rho"] = alloc.rho;
  j["checks"] = std::move(checks);
  j["pass"] = pass;
  emit(a.scenario.out, j.dump(2) + "\n");
  return pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint uplink/downlink power allocation with RF energy harvesting"};
  app.require_subcommand(1);

  ScenarioArgs solve_args;
  auto* solve = app.add_subcommand("solve", "optimal allocation for one scenario");
  add_scenario_flags(solve, solve_args);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "run a figure sweep and write CSV");
  auto* preset = sweep->add_option("--preset", sweep_args.preset, "fig3 ... fig8");
  auto* spec = sweep->add_option("--spec", sweep_args.spec, "sweep JSON (preset plus overrides)");
  preset->excludes(spec);
  sweep->add_option("--seed", sweep_args.seed, "master seed");
  sweep->add_option("--reps", sweep_args.reps, "repetitions per point");
  sweep->add_option("--jobs", sweep_args.jobs, "worker threads");
  sweep->add_option("--out", sweep_args.out, "output CSV (default stdout)");

  LifetimeArgs life_args;
  auto* life = app.add_subcommand("lifetime", "battery lifetime versus epsilon");
  life->add_option("--config", life_args.config, "scenario spec JSON")->required();
  life->add_option("--epsilon", life_args.epsilons, "battery share(s) in [0,1]")->delimiter(',');
  life->add_option("--cap", life_args.cap, "slot cap");
  life->add_option("--seed", life_args.seed, "master seed");
  life->add_option("--mode", life_args.mode, "dedicated or hybrid")
      ->check(CLI::IsMember({"dedicated", "hybrid"}));
  auto* life_rho = life->add_option("--rho", life_args.rho, "fixed splitting ratio");
  life->add_option("--grid", life_args.grid, "rho grid step")->excludes(life_rho);
  life->add_flag("--constant-channel", life_args.constant_channel, "reuse the first slot's channels");
  life->add_flag("--trace", life_args.trace, "record per-slot battery levels");
  life->add_option("--out", life_args.out, "output JSON (default stdout)");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle-check", "compare the solver with a grid search");
  add_scenario_flags(oracle, oracle_args.scenario);
  oracle->add_option("--tol", oracle_args.tol, "relative objective tolerance");
  oracle->add_option("--points", oracle_args.points, "first-pass grid budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), {}, kExitConfig);
  }

  try {
    if (*solve) return cmd_solve(solve_args);
    if (*sweep) {
      if (sweep_args.preset.empty() && sweep_args.spec.empty())
        throw ConfigError({"sweep: one of --preset or --spec is required"});
      return cmd_sweep(sweep_args);
    }
    if (*life) return cmd_lifetime(life_args);
    if (*oracle) return cmd_oracle_check(oracle_args);
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), e.fields(), kExitConfig);
  } catch (const SolverError& e) {
    return report_error(to_string(e.kind()), e.what(), {}, exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), {}, kExitConfig);
  }
  return kExitConfig;
}

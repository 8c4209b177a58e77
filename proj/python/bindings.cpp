#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>

#include "swipt/config.hpp"
#include "swipt/error.hpp"
#include "swipt/oracle.hpp"
#include "swipt/uplink.hpp"

namespace py = pybind11;
using namespace swipt;

namespace {

// Dicts cross the boundary as JSON text so the C++ schema checks apply.
Json from_py(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) return Json::parse(obj.cast<std::string>());
  const std::string text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return Json::parse(text);
}

py::object to_py(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

LoadedScenario load(const py::object& config, std::optional<std::uint64_t> seed) {
  return load_scenario(from_py(config), seed);
}

py::object generate_py(const py::object& config, std::optional<std::uint64_t> seed) {
  return to_py(to_json(load(config, seed).scenario));
}

py::object optimize_py(const py::object& config, const std::string& mode,
                       std::optional<double> rho, double grid_step,
                       std::optional<std::uint64_t> seed) {
  const LoadedScenario l = load(config, seed);
  RhoSearchOptions o;
  o.grid_step = grid_step;
  o.fixed_rho = rho;
  const OptimizeResult r = optimize(l.scenario, harvest_mode_from_string(mode), o);
  Json j;
  j["config"] = l.echo;
  j["seed"] = l.seed ? Json(*l.seed) : Json(nullptr);
  j["result"] = to_json(r.allocation, l.scenario);
  j["rho_report"] = to_json(r.report);
  return to_py(j);
}

py::object solve_at_rho_py(const py::object& config, const std::string& mode,
                           const std::vector<double>& rho, std::optional<std::uint64_t> seed) {
  const LoadedScenario l = load(config, seed);
  Vector r = rho;
  if (r.size() == 1) r.assign(l.scenario.num_users, rho[0]);
  return to_py(to_json(solve_at_rho(l.scenario, harvest_mode_from_string(mode), r), l.scenario));
}

py::object lifetime_py(const py::object& config, double epsilon, std::uint64_t seed, long cap,
                       const std::string& mode, std::optional<double> rho, double grid_step,
                       bool constant_channel, bool trace) {
  Json j = from_py(config);
  if (j.is_object()) j.erase("seed");
  LifetimeOptions o;
  o.cap = cap;
  o.mode = harvest_mode_from_string(mode);
  o.fixed_rho = rho;
  o.grid_step = grid_step;
  o.constant_channel = constant_channel;
  o.record_trace = trace;
  return to_py(to_json(simulate_lifetime(scenario_spec_from_json(j), epsilon, seed, o)));
}

std::string sweep_csv_py(const py::object& config) {
  const SweepConfig cfg = sweep_config_from_json(from_py(config));
  std::ostringstream os;
  write_csv(os, run_sweep(cfg),
            {"config: " + to_json(cfg).dump(), "seed: " + std::to_string(cfg.seed)});
  return os.str();
}

py::object oracle_check_py(const py::object& config, const std::string& mode,
                           std::optional<std::uint64_t> seed, long points, double grid_step) {
  const LoadedScenario l = load(config, seed);
  const HarvestMode m = harvest_mode_from_string(mode);
  check_oracle_limits(l.scenario, m);
  RhoSearchOptions o;
  o.grid_step = grid_step;
  const OptimizeResult r = optimize(l.scenario, m, o);
  Json checks = Json::array();
  for (const OracleCheck& c : compare_with_oracle(l.scenario, m, r.allocation, points)) {
    Json item;
    item["user"] = c.user >= 0 ? Json(c.user) : Json(nullptr);
    item["solver_objective"] = c.solver_objective;
    item["oracle_feasible"] = c.oracle.feasible;
    item["oracle_objective"] = c.oracle.feasible ? Json(c.oracle.objective) : Json(nullptr);
    item["relative_gap"] = c.oracle.feasible ? Json(c.relative_gap) : Json(nullptr);
    item["box_upper"] = c.box_upper;
    item["grid_points"] = c.oracle.evaluated;
    checks.push_back(std::move(item));
  }
  return to_py(checks);
}

py::tuple water_fill_py(const std::vector<double>& gains, const std::vector<double>& sigmas,
                        double bandwidth, double bits_per_second) {
  const UplinkSolution s = solve_uplink(gains, sigmas, bandwidth, bits_per_second);
  return py::make_tuple(s.p_ul, s.total());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("generate", &generate_py, py::arg("config"), py::arg("seed") = py::none(),
        "Draw (or load an explicit) scenario and return it as a dict.");
  m.def("optimize", &optimize_py, py::arg("config"), py::arg("mode") = "dedicated",
        py::arg("rho") = py::none(), py::arg("grid_step") = 0.01, py::arg("seed") = py::none(),
        "Joint allocation with the splitting-ratio search.");
  m.def("solve_at_rho", &solve_at_rho_py, py::arg("config"), py::arg("mode"), py::arg("rho"),
        py::arg("seed") = py::none(),
        "Allocation at fixed ratios; one value applies to every user.");
  m.def("simulate_lifetime", &lifetime_py, py::arg("config"), py::arg("epsilon"),
        py::arg("seed"), py::arg("cap") = 1000, py::arg("mode") = "dedicated",
        py::arg("rho") = py::none(), py::arg("grid_step") = 0.05,
        py::arg("constant_channel") = false, py::arg("trace") = false,
        "Battery lifetime in slots for one battery share epsilon.");
  m.def("sweep_csv", &sweep_csv_py, py::arg("config"),
        "Run a preset sweep ({'preset': name, ...overrides}) and return the CSV text.");
  m.def("preset_names", &preset_names);
  m.def("oracle_check", &oracle_check_py, py::arg("config"), py::arg("mode") = "dedicated",
        py::arg("seed") = py::none(), py::arg("points") = 200'000, py::arg("grid_step") = 0.01,
        "Compare the optimized downlink with a grid search on a tiny instance.");
  m.def("water_fill", &water_fill_py, py::arg("gains"), py::arg("sigmas"),
        py::arg("bandwidth"), py::arg("bits_per_second"),
        "Least total power meeting a rate target; returns (powers, total).");
}

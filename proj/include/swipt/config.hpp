#pragma once
// JSON configuration: scenario specs (generated or explicit), sweep specs and
// result serialization. Powers in W, rates in bit/s, bandwidth in Hz; the
// convenience fields snr_db, *_kbps, battery_dbm and noise_dbm_per_hz are
// converted at load and echoed next to the SI values.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "swipt/model.hpp"
#include "swipt/rho_optimizer.hpp"
#include "swipt/scenario.hpp"
#include "swipt/simulation.hpp"
#include "swipt/sweep.hpp"

namespace swipt {

using Json = nlohmann::ordered_json;

// Schema violation; `fields` lists every offending path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> fields);
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

Json read_json_file(const std::string& path);

// Applies the keys present in `j` onto `base`.
ScenarioSpec scenario_spec_from_json(const Json& j, ScenarioSpec base = {});
Json to_json(const ScenarioSpec& spec);

// Explicit instance: per-user gain matrices, noise and rate arrays.
SystemScenario explicit_scenario_from_json(const Json& j);
Json to_json(const SystemScenario& s);

struct LoadedScenario {
  SystemScenario scenario;
  std::optional<ScenarioSpec> spec;  // set when generated
  std::optional<std::uint64_t> seed;
  Json echo;                         // resolved configuration
};

// A config is either a scenario spec (plus optional "seed") or an object
// with a single "explicit" member. `seed` overrides the file's seed; a
// generated scenario without any seed is a ConfigError.
LoadedScenario load_scenario(const Json& j, std::optional<std::uint64_t> seed);

// Starts from the named preset and applies the overrides in `j`.
SweepConfig sweep_config_from_json(const Json& j);
Json to_json(const SweepConfig& cfg);

Json to_json(const AllocationResult& a, const SystemScenario& s);
Json to_json(const RhoSearchReport& r);
Json to_json(const SimTrace& t);

}  // namespace swipt

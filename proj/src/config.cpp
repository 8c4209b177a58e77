#include "swipt/config.hpp"

#include <fstream>
#include <set>

#include "swipt/error.hpp"

namespace swipt {

namespace {

std::string join_fields(const std::vector<std::string>& fields) {
  std::string s = "invalid configuration:";
  for (const auto& f : fields) s += " " + f + ";";
  return s;
}

// Typed access to one JSON object that records every problem instead of
// stopping at the first.
class Reader {
 public:
  Reader(const Json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) error("", "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.is_object() && j_.contains(key);
  }

  std::optional<double> number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const Json& v = j_.at(key);
    if (!v.is_number()) {
      error(key, "expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<long long> integer(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) {
      error(key, "expected an integer");
      return std::nullopt;
    }
    return v.get<long long>();
  }

  std::optional<std::uint64_t> seed(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const Json& v = j_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
      error(key, "expected a non-negative integer");
      return std::nullopt;
    }
    return v.get<std::uint64_t>();
  }

  std::optional<bool> boolean(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) {
      error(key, "expected true or false");
      return std::nullopt;
    }
    return v.get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const Json& v = j_.at(key);
    if (!v.is_string()) {
      error(key, "expected a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<Vector> vector(const std::string& key) {
    if (!has(key)) return std::nullopt;
    Vector out;
    if (!to_vector(j_.at(key), out)) {
      error(key, "expected an array of numbers");
      return std::nullopt;
    }
    return out;
  }

  std::optional<Matrix> matrix(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const Json& v = j_.at(key);
    Matrix out;
    bool ok = v.is_array();
    for (std::size_t i = 0; ok && i < v.size(); ++i) {
      out.emplace_back();
      ok = to_vector(v[i], out.back());
    }
    if (!ok) {
      error(key, "expected an array of arrays of numbers");
      return std::nullopt;
    }
    return out;
  }

  std::optional<Tensor3> tensor(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const Json& v = j_.at(key);
    Tensor3 out;
    bool ok = v.is_array();
    for (std::size_t l = 0; ok && l < v.size(); ++l) {
      ok = v[l].is_array();
      out.emplace_back();
      for (std::size_t i = 0; ok && i < v[l].size(); ++i) {
        out.back().emplace_back();
        ok = to_vector(v[l][i], out.back().back());
      }
    }
    if (!ok) {
      error(key, "expected a 3-level nested array of numbers");
      return std::nullopt;
    }
    return out;
  }

  // A number broadcast to `n` entries or an array of length n.
  std::optional<Vector> per_user(const std::string& key, std::size_t n) {
    if (!has(key)) return std::nullopt;
    const Json& v = j_.at(key);
    if (v.is_number()) return Vector(n, v.get<double>());
    Vector out;
    if (!to_vector(v, out) || out.size() != n) {
      error(key, "expected a number or an array with one entry per user");
      return std::nullopt;
    }
    return out;
  }

  const Json* raw(const std::string& key) { return has(key) ? &j_.at(key) : nullptr; }

  const Json* object(const std::string& key) {
    if (!has(key)) return nullptr;
    if (!j_.at(key).is_object()) {
      error(key, "expected an object");
      return nullptr;
    }
    return &j_.at(key);
  }

  void error(const std::string& key, const std::string& what) {
    std::string field = path_;
    if (!key.empty()) field += field.empty() ? key : "." + key;
    errors_.push_back((field.empty() ? "<root>" : field) + ": " + what);
  }

  void finish() {
    if (!j_.is_object()) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) error(key, "unknown field");
  }

 private:
  static bool to_vector(const Json& v, Vector& out) {
    if (!v.is_array()) return false;
    out.clear();
    for (const auto& x : v) {
      if (!x.is_number()) return false;
      out.push_back(x.get<double>());
    }
    return true;
  }

  const Json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void throw_if(const std::vector<std::string>& errors) {
  if (!errors.empty()) throw ConfigError(errors);
}

// Mutually exclusive SI / convenience pair; the convenience value is scaled.
std::optional<double> either(Reader& r, const std::string& si, const std::string& alt, double scale) {
  const auto a = r.number(si);
  const auto b = r.number(alt);
  if (a && b) {
    r.error(alt, "conflicts with " + si);
    return a;
  }
  if (b) return *b * scale;
  return a;
}

void read_spec_fields(Reader& r, ScenarioSpec& s, std::vector<std::string>& errors) {
  if (auto v = r.integer("num_users")) s.num_users = static_cast<int>(*v);
  if (auto v = r.integer("subcarriers")) s.subcarriers = static_cast<int>(*v);
  if (auto v = r.number("bandwidth_hz")) s.bandwidth_hz = *v;
  if (auto v = r.number("noise_dbm_per_hz")) s.noise_dbm_per_hz = *v;
  if (auto v = r.number("pathloss_exponent")) s.pathloss_exponent = *v;
  if (auto v = r.number("cell_radius")) s.cell_radius = *v;
  if (auto v = r.number("snr_db")) s.snr_dl_db = s.snr_ul_db = *v;
  for (auto [key, field] : {std::pair{"snr_dl_db", &s.snr_dl_db}, std::pair{"snr_ul_db", &s.snr_ul_db}}) {
    // null leaves the raw distance-scaled fading.
    if (const Json* v = r.raw(key); v && v->is_null())
      field->reset();
    else if (auto x = r.number(key))
      *field = *x;
  }
  if (const Json* v = r.raw("snr_reference_power_w")) {
    // null or "noise" selects the noise power itself as the reference.
    if (v->is_null() || (v->is_string() && v->get<std::string>() == "noise"))
      s.snr_reference_power_w.reset();
    else if (v->is_number())
      s.snr_reference_power_w = v->get<double>();
    else
      r.error("snr_reference_power_w", "expected a number, null or \"noise\"");
  }
  if (auto v = either(r, "r_dl_bps", "r_dl_kbps", 1e3)) s.r_dl_bps = *v;
  if (auto v = either(r, "r_ul_bps", "r_ul_kbps", 1e3)) s.r_ul_bps = *v;
  if (auto v = r.number("alpha")) s.alpha = *v;
  if (auto v = r.number("varsigma")) s.varsigma = *v;
  if (const Json* t = r.object("tariff")) {
    // alpha = price * delta_t * theta, varsigma = price * delta_t * offset.
    Reader tr(*t, "tariff", errors);
    const auto theta = tr.number("theta");
    const auto price = tr.number("price");
    const auto dt = tr.number("delta_t");
    const auto offset = tr.number("offset");
    tr.finish();
    if (r.has("alpha") || r.has("varsigma")) r.error("tariff", "conflicts with alpha/varsigma");
    if (!theta || !price || !dt) {
      r.error("tariff", "needs theta, price and delta_t");
    } else {
      s.alpha = *price * *dt * *theta;
      s.varsigma = *price * *dt * offset.value_or(0.0);
    }
  }
  if (auto v = r.number("kappa")) s.kappa = *v;
  if (auto v = r.vector("beta")) s.beta = *v;
  if (auto v = r.number("battery_w")) s.battery_w = *v;
  if (auto v = r.number("battery_dbm")) {
    if (r.has("battery_w")) r.error("battery_dbm", "conflicts with battery_w");
    s.battery_w = dbm_to_watt(*v);
  }
  if (auto v = r.number("eta")) s.eta = *v;
  if (auto v = r.number("p0_w")) s.p0 = *v;
  if (auto v = r.number("p0_prime_w")) s.p0_prime = *v;
  if (auto v = r.boolean("cross_gains")) s.cross_gains = *v;
  if (auto v = r.vector("distances")) s.distances = *v;
  r.has("derived");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> fields)
    : std::runtime_error(join_fields(fields)), fields_(std::move(fields)) {}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot open file"});
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError({path + ": " + e.what()});
  }
}

ScenarioSpec scenario_spec_from_json(const Json& j, ScenarioSpec base) {
  std::vector<std::string> errors;
  Reader r(j, "", errors);
  read_spec_fields(r, base, errors);
  r.finish();
  throw_if(errors);
  try {
    validate(base);
  } catch (const SolverError& e) {
    throw ConfigError({e.what()});
  }
  return base;
}

Json to_json(const ScenarioSpec& s) {
  Json j;
  j["num_users"] = s.num_users;
  j["subcarriers"] = s.subcarriers;
  j["bandwidth_hz"] = s.bandwidth_hz;
  j["noise_dbm_per_hz"] = s.noise_dbm_per_hz;
  j["pathloss_exponent"] = s.pathloss_exponent;
  j["cell_radius"] = s.cell_radius;
  j["snr_dl_db"] = s.snr_dl_db ? Json(*s.snr_dl_db) : Json(nullptr);
  j["snr_ul_db"] = s.snr_ul_db ? Json(*s.snr_ul_db) : Json(nullptr);
  j["snr_reference_power_w"] =
      s.snr_reference_power_w ? Json(*s.snr_reference_power_w) : Json(nullptr);
  j["r_dl_bps"] = s.r_dl_bps;
  j["r_ul_bps"] = s.r_ul_bps;
  j["alpha"] = s.alpha;
  j["varsigma"] = s.varsigma;
  j["kappa"] = s.kappa;
  if (s.beta) j["beta"] = *s.beta;
  j["battery_w"] = s.battery_w;
  j["eta"] = s.eta;
  j["p0_w"] = s.p0;
  j["p0_prime_w"] = s.p0_prime;
  j["cross_gains"] = s.cross_gains;
  if (s.distances) j["distances"] = *s.distances;
  // Informational; ignored when read back.
  j["derived"] = {{"noise_w", s.sigma()},
                  {"reference_power_w", s.reference_power()},
                  {"r_dl_kbps", s.r_dl_bps / 1e3},
                  {"r_ul_kbps", s.r_ul_bps / 1e3},
                  {"battery_dbm", s.battery_w > 0.0 ? Json(watt_to_dbm(s.battery_w)) : Json(nullptr)}};
  return j;
}

SystemScenario explicit_scenario_from_json(const Json& j) {
  std::vector<std::string> errors;
  Reader r(j, "explicit", errors);
  SystemScenario s;
  const auto dl = r.matrix("downlink_gain");
  const auto ul = r.matrix("uplink_gain");
  if (!dl) r.error("downlink_gain", "required");
  if (!ul) r.error("uplink_gain", "required");
  const std::size_t K = dl ? dl->size() : 0;
  const std::size_t N = K > 0 ? (*dl)[0].size() : 0;
  if (dl) s.channels.downlink_gain = *dl;
  if (ul) s.channels.uplink_gain = *ul;
  if (auto v = r.tensor("cross_gain")) s.channels.cross_gain = *v;
  s.num_users = static_cast<int>(K);
  s.subcarriers = static_cast<int>(N);
  if (auto v = r.number("bandwidth_hz")) s.bandwidth = *v;
  const auto sig_dl = r.matrix("sigma_dl");
  const auto sig_ul = r.matrix("sigma_ul");
  const auto n0 = r.number("noise_dbm_per_hz");
  if (n0 && (sig_dl || sig_ul)) r.error("noise_dbm_per_hz", "conflicts with sigma_dl/sigma_ul");
  if (n0 || (!sig_dl && !sig_ul)) {
    const double sigma = noise_power(n0.value_or(-174.0), s.bandwidth);
    s.noise.sigma_dl.assign(K, Vector(N, sigma));
    s.noise.sigma_ul.assign(K, Vector(N, sigma));
  }
  if (sig_dl) s.noise.sigma_dl = *sig_dl;
  if (sig_ul) s.noise.sigma_ul = *sig_ul;
  if (sig_dl.has_value() != sig_ul.has_value()) r.error("sigma_dl", "sigma_dl and sigma_ul go together");
  auto rates = [&](const std::string& si, const std::string& kbps, Vector& out) {
    const auto a = r.per_user(si, K);
    const auto b = r.per_user(kbps, K);
    if (a && b) r.error(kbps, "conflicts with " + si);
    if (a) {
      out = *a;
    } else if (b) {
      out = *b;
      for (double& x : out) x *= 1e3;
    } else {
      r.error(si, "required");
    }
  };
  rates("r_dl_bps", "r_dl_kbps", s.rates.r_dl);
  rates("r_ul_bps", "r_ul_kbps", s.rates.r_ul);
  s.costs.alpha = r.number("alpha").value_or(1.0);
  s.costs.varsigma = r.number("varsigma").value_or(0.0);
  const auto beta = r.per_user("beta", K);
  const auto kappa = r.number("kappa");
  if (beta && kappa) r.error("kappa", "conflicts with beta");
  if (beta) {
    s.costs.beta = *beta;
  } else {
    s.costs.beta.assign(K, kappa.value_or(0.0) * s.costs.alpha);
  }
  s.battery = r.per_user("battery_w", K).value_or(Vector(K, 0.0));
  if (auto v = r.number("eta")) s.eta = *v;
  if (auto v = r.number("p0_w")) s.p0 = *v;
  if (auto v = r.number("p0_prime_w")) s.p0_prime = *v;
  r.finish();
  throw_if(errors);
  try {
    validate(s);
  } catch (const SolverError& e) {
    throw ConfigError({std::string("explicit: ") + e.what()});
  }
  return s;
}

Json to_json(const SystemScenario& s) {
  Json j;
  j["bandwidth_hz"] = s.bandwidth;
  j["downlink_gain"] = s.channels.downlink_gain;
  j["uplink_gain"] = s.channels.uplink_gain;
  if (s.channels.has_cross()) j["cross_gain"] = s.channels.cross_gain;
  j["sigma_dl"] = s.noise.sigma_dl;
  j["sigma_ul"] = s.noise.sigma_ul;
  j["r_dl_bps"] = s.rates.r_dl;
  j["r_ul_bps"] = s.rates.r_ul;
  j["alpha"] = s.costs.alpha;
  j["varsigma"] = s.costs.varsigma;
  j["beta"] = s.costs.beta;
  j["battery_w"] = s.battery;
  j["eta"] = s.eta;
  j["p0_w"] = s.p0;
  j["p0_prime_w"] = s.p0_prime;
  return j;
}

LoadedScenario load_scenario(const Json& j, std::optional<std::uint64_t> seed) {
  std::vector<std::string> errors;
  Reader r(j, "", errors);
  LoadedScenario out;
  const auto file_seed = r.seed("seed");
  if (const Json* e = r.object("explicit")) {
    r.finish();
    throw_if(errors);
    out.scenario = explicit_scenario_from_json(*e);
    out.echo["explicit"] = to_json(out.scenario);
    return out;
  }
  ScenarioSpec spec;
  read_spec_fields(r, spec, errors);
  r.finish();
  out.seed = seed ? seed : file_seed;
  if (!out.seed) errors.push_back("seed: required for a generated scenario (flag, config or SWIPT_SEED)");
  throw_if(errors);
  try {
    out.scenario = generate(spec, *out.seed);
  } catch (const SolverError& e) {
    throw ConfigError({e.what()});
  }
  out.spec = spec;
  out.echo = to_json(spec);
  out.echo["seed"] = *out.seed;
  return out;
}

SweepConfig sweep_config_from_json(const Json& j) {
  std::vector<std::string> errors;
  Reader r(j, "", errors);
  const auto preset = r.string("preset");
  if (!preset) {
    r.error("preset", "required");
    r.finish();
    throw ConfigError(errors);
  }
  SweepConfig c;
  try {
    c = preset_config(*preset);
  } catch (const SolverError& e) {
    throw ConfigError({std::string("preset: ") + e.what()});
  }
  if (auto v = r.integer("repetitions")) c.repetitions = static_cast<int>(*v);
  if (auto v = r.seed("seed")) c.seed = *v;
  if (auto v = r.integer("jobs")) c.jobs = static_cast<int>(*v);
  if (auto v = r.number("grid_step")) c.grid_step = *v;
  if (auto v = r.number("fixed_rho")) c.fixed_rho = *v;
  if (auto v = r.integer("lifetime_cap")) c.lifetime_cap = static_cast<long>(*v);
  if (auto v = r.vector("x_values")) c.x_values = *v;
  if (auto v = r.vector("series_values")) c.series_values = *v;
  if (const Json* sc = r.object("scenario")) {
    Reader sr(*sc, "scenario", errors);
    read_spec_fields(sr, c.base, errors);
    sr.finish();
  }
  r.finish();
  if (c.repetitions < 0) errors.push_back("repetitions: must be >= 0");
  if (c.jobs < 1) errors.push_back("jobs: must be >= 1");
  if (!(c.grid_step > 0.0 && c.grid_step < 1.0)) errors.push_back("grid_step: must lie in (0,1)");
  if (!(c.fixed_rho > 0.0 && c.fixed_rho < 1.0)) errors.push_back("fixed_rho: must lie in (0,1)");
  if (c.lifetime_cap < 0) errors.push_back("lifetime_cap: must be >= 0");
  throw_if(errors);
  try {
    validate(c.base);
  } catch (const SolverError& e) {
    throw ConfigError({std::string("scenario: ") + e.what()});
  }
  return c;
}

Json to_json(const SweepConfig& c) {
  Json j;
  j["preset"] = c.preset;
  j["repetitions"] = c.repetitions;
  j["seed"] = c.seed;
  j["grid_step"] = c.grid_step;
  j["fixed_rho"] = c.fixed_rho;
  j["lifetime_cap"] = c.lifetime_cap;
  j["x_values"] = c.x_values;
  j["series_values"] = c.series_values;
  j["scenario"] = to_json(c.base);
  return j;
}

Json to_json(const AllocationResult& a, const SystemScenario& s) {
  Json j;
  j["mode"] = to_string(a.mode);
  j["objective"] = a.objective;
  j["bs_power"] = a.bs_power;
  j["rho"] = a.rho;
  j["p_dl"] = a.p_dl;
  j["p_ul"] = a.p_ul;
  j["lambda"] = a.lambda;
  j["psi"] = a.psi;
  j["nu"] = a.nu;
  j["p_th"] = a.p_th;
  j["downlink_active"] = a.downlink_active;
  j["uplink_active"] = a.uplink_active;
  Json d;
  const Vector q = harvested_power(s, a.p_dl, a.rho, a.mode);
  Vector rdl, rul, ptot;
  for (int k = 0; k < s.num_users; ++k) {
    rdl.push_back(downlink_rate(a.p_dl[k], a.rho[k], s.channels.downlink_gain[k],
                                s.noise.sigma_dl[k], s.bandwidth));
    rul.push_back(uplink_rate(a.p_ul[k], s.channels.uplink_gain[k], s.noise.sigma_ul[k],
                              s.bandwidth));
    ptot.push_back(total_user_power(s, k, a.p_ul[k]));
  }
  d["downlink_rate_bps"] = rdl;
  d["uplink_rate_bps"] = rul;
  d["harvested_w"] = q;
  d["user_total_w"] = ptot;
  d["newton_iterations"] = a.newton_iterations;
  d["residual"] = a.residual;
  d["used_barrier"] = a.used_barrier;
  j["diagnostics"] = d;
  return j;
}

Json to_json(const RhoSearchReport& r) {
  Json j;
  j["rho_grid"] = r.rho_grid;
  j["objective_curve"] = r.objective_curve;
  j["sum_power_curve"] = r.sum_power_curve;
  j["rho_opt"] = r.rho_opt;
  j["infeasible_points"] = r.infeasible_points;
  j["sweeps"] = r.sweeps;
  return j;
}

Json to_json(const SimTrace& t) {
  Json j;
  j["epsilon"] = t.epsilon;
  j["lifetime"] = t.lifetime;
  j["capped"] = t.capped;
  j["infeasible_slots"] = t.infeasible_slots;
  if (!t.slots.empty()) {
    Json slots = Json::array();
    for (const SlotRecord& s : t.slots) {
      Json e;
      e["battery_w"] = s.battery;
      e["harvested_w"] = s.harvested;
      e["consumed_w"] = s.consumed;
      e["utility"] = s.utility;
      e["infeasible"] = s.infeasible;
      slots.push_back(std::move(e));
    }
    j["slots"] = std::move(slots);
  }
  return j;
}

}  // namespace swipt

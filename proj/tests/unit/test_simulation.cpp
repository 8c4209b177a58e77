#include <doctest.h>

#include <cmath>
#include <sstream>

#include "swipt/error.hpp"
#include "swipt/simulation.hpp"
#include "swipt/sweep.hpp"
#include "swipt/uplink.hpp"

using namespace swipt;

namespace {

ScenarioSpec lifetime_spec() {
  ScenarioSpec spec;
  spec.num_users = 1;
  spec.subcarriers = 5;
  spec.snr_dl_db = 10.0;
  spec.snr_ul_db = 10.0;
  spec.r_dl_bps = 100e3;
  spec.r_ul_bps = 1e6;
  spec.cross_gains = false;
  spec.distances = Vector{0.7};
  return spec;
}

double slot_need(const ScenarioSpec& spec, std::uint64_t seed) {
  const SystemScenario s = generate(spec, derive_seed(seed, 0));
  const UplinkSolution up =
      solve_uplink(s.channels.uplink_gain[0], s.noise.sigma_ul[0], s.bandwidth, s.rates.r_ul[0]);
  return up.total();
}

}  // namespace

TEST_CASE("full battery draw on a constant channel lasts floor(P/c) slots") {
  ScenarioSpec spec = lifetime_spec();
  const double c = slot_need(spec, 11);
  spec.battery_w = 37.5 * c;
  LifetimeOptions opt;
  opt.constant_channel = true;
  opt.grid_step = 0.05;
  const SimTrace t = simulate_lifetime(spec, 1.0, 11, opt);
  CHECK(t.lifetime == 37);
  CHECK_FALSE(t.capped);
  spec.battery_w = 3.0 * c;
  CHECK(simulate_lifetime(spec, 1.0, 11, opt).lifetime == 3);
}

TEST_CASE("no battery draw never depletes") {
  ScenarioSpec spec = lifetime_spec();
  spec.battery_w = slot_need(spec, 5);
  LifetimeOptions opt;
  opt.cap = 200;
  opt.grid_step = 0.05;
  const SimTrace t = simulate_lifetime(spec, 0.0, 5, opt);
  CHECK(t.lifetime == 200);
  CHECK(t.capped);
}

TEST_CASE("lifetime is non-increasing in the battery share") {
  ScenarioSpec spec = lifetime_spec();
  spec.distances.reset();
  spec.battery_w = 20.0 * slot_need(lifetime_spec(), 1);
  LifetimeOptions opt;
  opt.cap = 3000;
  opt.grid_step = 0.05;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    long prev = opt.cap + 1;
    for (double eps : {0.01, 0.25, 0.5, 0.9, 1.0}) {
      const long life = simulate_lifetime(spec, eps, seed, opt).lifetime;
      CHECK(life <= prev);
      prev = life;
    }
  }
}

TEST_CASE("recorded trace follows the battery recursion") {
  ScenarioSpec spec = lifetime_spec();
  spec.battery_w = 10.0 * slot_need(spec, 2);
  LifetimeOptions opt;
  opt.cap = 50;
  opt.grid_step = 0.05;
  opt.record_trace = true;
  const double eps = 0.5;
  const SimTrace t = simulate_lifetime(spec, eps, 2, opt);
  REQUIRE(!t.slots.empty());
  double level = spec.battery_w;
  for (const SlotRecord& r : t.slots) {
    REQUIRE_FALSE(r.infeasible);
    const double need = (1.0 - eps) * r.consumed[0];
    CHECK(r.harvested[0] >= need * (1.0 - 1e-9));
    level = std::max(0.0, level + need - r.consumed[0]);
    CHECK(r.battery[0] == doctest::Approx(level).epsilon(1e-12));
  }
  CHECK(static_cast<long>(t.slots.size()) == std::min<long>(t.lifetime + 1, opt.cap));
}

TEST_CASE("lifetime inputs are validated") {
  CHECK_THROWS_AS(simulate_lifetime(lifetime_spec(), 1.5, 1), SolverError);
  CHECK_THROWS_AS(simulate_lifetime(lifetime_spec(), -0.1, 1), SolverError);
}

TEST_CASE("battery-only system flags outages") {
  ScenarioSpec spec = lifetime_spec();
  spec.num_users = 2;
  spec.distances = Vector{0.5, 0.9};
  const SystemScenario s = generate(spec, 4);
  const BaselineResult b = battery_only(s);
  CHECK(b.outage == std::vector<bool>{true, true});
  CHECK(b.allocation.rho == Vector{0.0, 0.0});
  const Vector q = harvested_power(s, b.allocation.p_dl, b.allocation.rho, HarvestMode::Dedicated);
  CHECK(q == Vector{0.0, 0.0});
  SystemScenario rich = s;
  rich.battery.assign(2, 1.0);
  CHECK(battery_only(rich).outage == std::vector<bool>{false, false});
}

TEST_CASE("sweeps: empty, deterministic, thread-count independent") {
  SweepConfig cfg = preset_config("fig5");
  cfg.repetitions = 0;
  SweepTable empty = run_sweep(cfg);
  CHECK(empty.rows.empty());
  CHECK(empty.means.empty());

  cfg.repetitions = 6;
  std::ostringstream a, b;
  write_csv(a, run_sweep(cfg), {"seed: 1"});
  cfg.jobs = 4;
  write_csv(b, run_sweep(cfg), {"seed: 1"});
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("# seed: 1\nkind,series,x,rep,objective,sum_power,bs_power\n", 0) == 0);

  CHECK_THROWS_AS(preset_config("fig9"), SolverError);
}

TEST_CASE("fig8 sweep: hybrid never needs more BS power") {
  SweepConfig cfg = preset_config("fig8");
  cfg.repetitions = 5;
  cfg.x_values = {0.0, 10.0};
  const SweepTable t = run_sweep(cfg);
  int compared = 0;
  for (const SweepRow& d : t.rows) {
    if (d.series.find("dedicated") == std::string::npos) continue;
    const std::string users = d.series.substr(0, d.series.find(' '));
    for (const SweepRow& h : t.rows)
      if (h.series == users + " hybrid" && h.x == d.x && h.rep == d.rep) {
        CHECK(h.metrics[0] <= d.metrics[0] * (1.0 + 1e-9));
        ++compared;
      }
  }
  CHECK(compared == 2 * 2 * 5);
}

TEST_CASE("fig3 sweep rows cover the rho grid per series") {
  SweepConfig cfg = preset_config("fig3");
  cfg.repetitions = 2;
  cfg.grid_step = 0.1;
  const SweepTable t = run_sweep(cfg);
  CHECK(t.rows.size() == 3 * 9 * 2);
  CHECK(t.means.size() == 3 * 9);
  CHECK(t.rows.front().series == "snr_ul_db=0");
}

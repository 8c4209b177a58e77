#include "swipt/simulation.hpp"

#include <algorithm>

#include "swipt/error.hpp"

namespace swipt {

namespace {

// Harvest the solver certifies up to rounding is taken as delivered in full.
constexpr double kHarvestSlack = 1e-9;

struct SlotPlan {
  bool infeasible = false;
  Vector harvested;
  Vector consumed;
  double utility = 0.0;
};

SlotPlan plan_slot(const SystemScenario& s, double epsilon, const LifetimeOptions& opt) {
  RhoSearchOptions ro;
  ro.grid_step = opt.grid_step;
  ro.fixed_rho = opt.fixed_rho;
  ro.solve.battery_fraction = epsilon;
  SlotPlan plan;
  try {
    const AllocationResult a = optimize(s, opt.mode, ro).allocation;
    plan.harvested = harvested_power(s, a.p_dl, a.rho, opt.mode);
    for (int k = 0; k < s.num_users; ++k) plan.consumed.push_back(total_user_power(s, k, a.p_ul[k]));
    plan.utility = a.objective;
  } catch (const SolverError& e) {
    if (e.kind() == ErrorKind::InvalidInput) throw;
    plan.infeasible = true;
  }
  return plan;
}

}  // namespace

SimTrace simulate_lifetime(const ScenarioSpec& tmpl, double epsilon, std::uint64_t seed,
                           const LifetimeOptions& opt) {
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0,1]");
  require(opt.cap >= 0, "lifetime cap must be >= 0");
  validate(tmpl);
  ScenarioSpec spec = tmpl;
  if (!spec.distances) {
    std::mt19937_64 rng(derive_seed(seed, 0x706c616365ULL));
    Vector d(spec.num_users);
    for (double& v : d) v = 1.0 - uniform01(rng);
    spec.distances = d;
  }
  if (opt.mode == HarvestMode::Dedicated) spec.cross_gains = false;

  SimTrace trace;
  trace.epsilon = epsilon;
  Vector battery(spec.num_users, spec.battery_w);
  std::optional<SlotPlan> fixed;
  for (long slot = 0; slot < opt.cap; ++slot) {
    SlotPlan plan;
    if (opt.constant_channel) {
      if (!fixed) fixed = plan_slot(generate(spec, derive_seed(seed, 0)), epsilon, opt);
      plan = *fixed;
    } else {
      plan = plan_slot(generate(spec, derive_seed(seed, static_cast<std::uint64_t>(slot))), epsilon,
                       opt);
    }
    bool depleted = plan.infeasible;
    if (plan.infeasible) {
      ++trace.infeasible_slots;
    } else {
      for (int k = 0; k < spec.num_users; ++k) {
        const double need = (1.0 - epsilon) * plan.consumed[k];
        double credit = std::min(plan.harvested[k], need);
        if (credit >= need * (1.0 - kHarvestSlack)) credit = need;
        const BatteryStep step = battery_step(battery[k], credit, plan.consumed[k]);
        battery[k] = step.level;
        depleted = depleted || step.depleted;
      }
    }
    if (opt.record_trace) {
      SlotRecord rec;
      rec.battery = battery;
      rec.harvested = plan.harvested;
      rec.consumed = plan.consumed;
      rec.utility = plan.utility;
      rec.infeasible = plan.infeasible;
      trace.slots.push_back(std::move(rec));
    }
    if (depleted) return trace;
    trace.lifetime = slot + 1;
  }
  trace.capped = true;
  return trace;
}

BaselineResult battery_only(const SystemScenario& s) {
  SolveOptions so;
  so.battery_fraction = 1.0;  // the threshold vanishes; rho = 0 leaves nothing to harvest
  const Vector rho(s.num_users, 0.0);
  BaselineResult out;
  out.allocation = solve_at_rho(s, HarvestMode::Dedicated, rho, so);
  out.utility = out.allocation.objective;
  for (int k = 0; k < s.num_users; ++k)
    out.outage.push_back(s.battery[k] < total_user_power(s, k, out.allocation.p_ul[k]));
  return out;
}

}  // namespace swipt

#pragma once
// Time-slotted battery simulation and the battery-only comparison system.

#include <cstdint>
#include <optional>

#include "swipt/model.hpp"
#include "swipt/rho_optimizer.hpp"
#include "swipt/scenario.hpp"

namespace swipt {

struct SlotRecord {
  Vector battery;    // level after the slot
  Vector harvested;  // Q_k delivered by the allocation
  Vector consumed;   // P_k^tot
  double utility = 0.0;
  bool infeasible = false;
};

struct SimTrace {
  double epsilon = 0.0;
  long lifetime = 0;  // slots completed before the first user's battery depletes
  bool capped = false;
  long infeasible_slots = 0;
  std::vector<SlotRecord> slots;  // filled only when recording
};

struct LifetimeOptions {
  long cap = 1'000'000;
  HarvestMode mode = HarvestMode::Dedicated;
  std::optional<double> fixed_rho;
  double grid_step = 0.01;
  bool constant_channel = false;  // reuse the first slot's channels throughout
  bool record_trace = false;
};

// Every user starts with tmpl.battery_w. Each slot user k spends P_k^tot,
// taking epsilon of it from the battery and the rest from harvesting; the
// downlink is sized with the battery term epsilon * P_k^tot. Placements are
// drawn once per trace, fading once per slot. An infeasible slot counts as
// depletion.
SimTrace simulate_lifetime(const ScenarioSpec& tmpl, double epsilon, std::uint64_t seed,
                           const LifetimeOptions& opt = {});

struct BaselineResult {
  AllocationResult allocation;  // rho = 0, Q = 0
  std::vector<bool> outage;     // battery cannot cover P_k^tot
  double utility = 0.0;
};

// The system without harvesting: all user power comes from the battery.
BaselineResult battery_only(const SystemScenario& s);

}  // namespace swipt

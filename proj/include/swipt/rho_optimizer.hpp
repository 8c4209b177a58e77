#pragma once
// Joint allocation: uplink first (independent of rho), then the downlink at
// each candidate splitting ratio, keeping the ratio of least utility.

#include <optional>

#include "swipt/downlink_dedicated.hpp"
#include "swipt/downlink_hybrid.hpp"
#include "swipt/model.hpp"

namespace swipt {

struct SolveOptions {
  BisectionOptions bisection;
  HybridOptions hybrid;
  // When set, user k's battery contribution in the harvest threshold is
  // battery_fraction * P_k^tot instead of the scenario battery.
  std::optional<double> battery_fraction;
};

// Full allocation at the given ratios. Throws the downlink solver's errors.
AllocationResult solve_at_rho(const SystemScenario& s, HarvestMode mode,
                              std::span<const double> rho, const SolveOptions& opt = {});

struct RhoSearchOptions {
  double grid_step = 0.01;
  std::optional<double> fixed_rho;  // evaluate this single ratio instead of the grid
  int max_sweeps = 5;               // coordinate sweeps in hybrid mode
  SolveOptions solve;
};

struct RhoSearchReport {
  Vector rho_grid;
  // [k][grid index]; NaN marks a grid point where the downlink solve failed.
  // Dedicated: alpha * sum_i P_dl,k + beta_k (P_k^tot - Q_k).
  // Hybrid: the full utility with the other users' ratios held at their
  // values during the final sweep.
  Matrix objective_curve;
  // Same layout; BS power plus user power (sum P_dl + P^tot) for user k in
  // dedicated mode, over all users in hybrid mode.
  Matrix sum_power_curve;
  Vector rho_opt;
  std::vector<std::vector<int>> infeasible_points;  // grid indices per user
  int sweeps = 0;
};

struct OptimizeResult {
  AllocationResult allocation;
  RhoSearchReport report;
};

// Grid {step, 2 step, ..., <= 1 - step}. Throws InvalidInput unless 0 < step < 1.
Vector rho_grid(double grid_step);

// Throws Infeasible when every grid point fails for some user.
OptimizeResult optimize(const SystemScenario& s, HarvestMode mode,
                        const RhoSearchOptions& opt = {});

}  // namespace swipt

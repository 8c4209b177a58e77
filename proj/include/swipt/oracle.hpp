#pragma once
// Brute-force grid minimization of the downlink problems on tiny instances,
// used to cross-check the multiplier-based solvers. Every power except the
// last subcarrier of each user walks a grid over [0, box_upper]; the last one
// takes its smallest value meeting the constraints (closed form, or a
// two-variable linear program when two users share the harvest constraints).
// Candidates are then re-checked with the exact constraint formulas.

#include "swipt/downlink_dedicated.hpp"
#include "swipt/downlink_hybrid.hpp"

namespace swipt {

struct GridSpec {
  double box_upper = 0.0;         // every power lies in [0, box_upper]
  long coarse_points = 200'000;   // first-pass budget over the gridded coordinates
  int refine_factor = 10;         // each later pass divides the step by this
  int passes = 2;                 // coarse scan plus local refinements
  long max_points = 100'000'000;  // refusal threshold for any single pass
};

struct OracleResult {
  bool feasible = false;  // false: no grid point satisfies the constraints
  Matrix p;               // [user][subcarrier]; one row in the dedicated case
  double objective = 0.0;
  long evaluated = 0;
};

// sum_i alpha_tilde_i p_i subject to the rate and harvest constraints; N <= 3.
OracleResult grid_minimize_dedicated(const DedicatedProblem& prob, const GridSpec& grid);

// The same over the K*N powers of a hybrid problem; K <= 2 and K*N <= 4.
OracleResult grid_minimize_hybrid(const HybridProblem& prob, const GridSpec& grid);

struct OracleCheck {
  int user = -1;  // -1: all users jointly (hybrid)
  double solver_objective = 0.0;
  OracleResult oracle;
  double box_upper = 0.0;
  double relative_gap = 0.0;  // (oracle - solver) / |solver|; inf when the grid is infeasible
};

// Rebuilds the downlink problem(s) at the allocation's ratios and uplink
// powers and grid-minimizes them inside a box of ten times the solver's
// downlink power. One check per user in dedicated mode, one joint check in
// hybrid mode. Throws InvalidInput when the instance exceeds the limits above.
void check_oracle_limits(const SystemScenario& s, HarvestMode mode);
std::vector<OracleCheck> compare_with_oracle(const SystemScenario& s, HarvestMode mode,
                                             const AllocationResult& alloc,
                                             long coarse_points = 200'000);

}  // namespace swipt

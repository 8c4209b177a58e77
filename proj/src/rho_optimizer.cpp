#include "swipt/rho_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "swipt/error.hpp"
#include "swipt/uplink.hpp"

namespace swipt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double row_sum(const Vector& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

struct Uplink {
  std::vector<UplinkSolution> sol;
  Vector totals;    // sum_i P_k,BS^i
  Vector p_tot;     // P_k^tot
  Vector battery;   // battery term used in the thresholds
};

Uplink solve_uplinks(const SystemScenario& s, const SolveOptions& opt) {
  Uplink up;
  for (int k = 0; k < s.num_users; ++k) {
    up.sol.push_back(solve_uplink(s.channels.uplink_gain[k], s.noise.sigma_ul[k], s.bandwidth,
                                  s.rates.r_ul[k]));
    up.totals.push_back(up.sol.back().total());
    up.p_tot.push_back(total_user_power(s, k, up.sol.back().p_ul));
    up.battery.push_back(opt.battery_fraction ? *opt.battery_fraction * up.p_tot.back()
                                              : s.battery[k]);
  }
  return up;
}

struct UserPoint {
  DedicatedDownlinkSolution sol;
  double objective = 0.0;
  double sum_power = 0.0;
};

UserPoint solve_user(const SystemScenario& s, int k, double rho, const Uplink& up,
                     const SolveOptions& opt) {
  const DedicatedProblem prob = make_dedicated_problem(s, k, rho, up.totals[k], up.battery[k]);
  UserPoint pt;
  pt.sol = solve_downlink_dedicated(prob, opt.bisection);
  double received = 0.0;
  for (int i = 0; i < s.subcarriers; ++i)
    received += pt.sol.p_dl[i] * s.channels.downlink_gain[k][i] + s.noise.sigma_dl[k][i];
  const double q = s.eta * rho * received;
  const double bs = row_sum(pt.sol.p_dl);
  pt.objective = s.costs.alpha * bs + s.costs.beta[k] * (up.p_tot[k] - q);
  pt.sum_power = bs + up.p_tot[k];
  return pt;
}

AllocationResult assemble(const SystemScenario& s, HarvestMode mode, std::span<const double> rho,
                          const Uplink& up, const SolveOptions& opt) {
  const int K = s.num_users;
  AllocationResult a;
  a.mode = mode;
  a.rho.assign(rho.begin(), rho.end());
  for (int k = 0; k < K; ++k) {
    a.p_ul.push_back(up.sol[k].p_ul);
    a.nu.push_back(up.sol[k].nu);
    a.uplink_active.push_back(up.sol[k].active_set);
  }
  if (mode == HarvestMode::Dedicated) {
    for (int k = 0; k < K; ++k) {
      const DedicatedProblem prob =
          make_dedicated_problem(s, k, rho[k], up.totals[k], up.battery[k]);
      const DedicatedDownlinkSolution sol = solve_downlink_dedicated(prob, opt.bisection);
      a.p_dl.push_back(sol.p_dl);
      a.lambda.push_back(sol.lambda);
      a.psi.push_back(sol.psi);
      a.p_th.push_back(sol.p_th);
      a.downlink_active.push_back(sol.active_set);
      a.residual = std::max(a.residual, dedicated_stationarity_residual(prob, sol));
    }
  } else {
    const HybridProblem prob = make_hybrid_problem(s, rho, up.totals, up.battery);
    const HybridDownlinkSolution sol = solve_downlink_hybrid(prob, opt.hybrid);
    a.p_dl = sol.p_dl;
    a.lambda = sol.lambda;
    a.psi = sol.psi;
    a.p_th = sol.p_th;
    a.downlink_active = sol.active_sets;
    a.newton_iterations = sol.newton_iterations;
    a.used_barrier = sol.used_barrier;
    a.residual = sol.residual_norm;
  }
  for (const auto& row : a.p_dl) a.bs_power += row_sum(row);
  a.objective = power_utility(s, a);
  return a;
}

bool recoverable(const SolverError& e) { return e.kind() != ErrorKind::InvalidInput; }

}  // namespace

AllocationResult solve_at_rho(const SystemScenario& s, HarvestMode mode,
                              std::span<const double> rho, const SolveOptions& opt) {
  validate(s, mode == HarvestMode::Hybrid);
  require(static_cast<int>(rho.size()) == s.num_users, "rho: expected one ratio per user");
  if (opt.battery_fraction)
    require(*opt.battery_fraction >= 0.0 && *opt.battery_fraction <= 1.0,
            "battery_fraction must lie in [0,1]");
  return assemble(s, mode, rho, solve_uplinks(s, opt), opt);
}

Vector rho_grid(double grid_step) {
  require(grid_step > 0.0 && grid_step < 1.0, "grid_step must lie in (0,1)");
  Vector grid;
  for (int j = 1;; ++j) {
    const double r = j * grid_step;
    if (r > 1.0 - grid_step + 1e-12) break;
    grid.push_back(r);
  }
  if (grid.empty()) grid.push_back(grid_step);  // step >= 0.5: a single point
  return grid;
}

OptimizeResult optimize(const SystemScenario& s, HarvestMode mode, const RhoSearchOptions& opt) {
  validate(s, mode == HarvestMode::Hybrid);
  const int K = s.num_users;
  OptimizeResult out;
  RhoSearchReport& rep = out.report;
  if (opt.fixed_rho) {
    require(*opt.fixed_rho > 0.0 && *opt.fixed_rho < 1.0, "fixed rho must lie in (0,1)");
    rep.rho_grid = {*opt.fixed_rho};
  } else {
    rep.rho_grid = rho_grid(opt.grid_step);
  }
  const int G = static_cast<int>(rep.rho_grid.size());
  rep.objective_curve.assign(K, Vector(G, kNaN));
  rep.sum_power_curve.assign(K, Vector(G, kNaN));
  rep.infeasible_points.assign(K, {});
  rep.rho_opt.assign(K, kNaN);
  const Uplink up = solve_uplinks(s, opt.solve);

  // Per-user search; in dedicated mode this is exact, in hybrid mode it seeds
  // the coordinate sweeps.
  for (int k = 0; k < K; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < G; ++j) {
      try {
        const UserPoint pt = solve_user(s, k, rep.rho_grid[j], up, opt.solve);
        rep.objective_curve[k][j] = pt.objective;
        rep.sum_power_curve[k][j] = pt.sum_power;
        if (pt.objective < best) {
          best = pt.objective;
          rep.rho_opt[k] = rep.rho_grid[j];
        }
      } catch (const SolverError& e) {
        if (!recoverable(e)) throw;
        rep.infeasible_points[k].push_back(j);
      }
    }
  }

  if (mode == HarvestMode::Dedicated) {
    for (int k = 0; k < K; ++k)
      if (std::isnan(rep.rho_opt[k]))
        fail(ErrorKind::Infeasible,
             "user " + std::to_string(k) + ": downlink infeasible at every rho grid point");
    out.allocation = assemble(s, mode, rep.rho_opt, up, opt.solve);
    return out;
  }

  Vector rho = rep.rho_opt;
  for (double& r : rho)
    if (std::isnan(r)) r = rep.rho_grid[G / 2];
  for (rep.sweeps = 0; rep.sweeps < std::max(1, opt.max_sweeps);) {
    ++rep.sweeps;
    bool changed = false;
    for (int k = 0; k < K; ++k) {
      rep.objective_curve[k].assign(G, kNaN);
      rep.sum_power_curve[k].assign(G, kNaN);
      rep.infeasible_points[k].clear();
      double best = std::numeric_limits<double>::infinity();
      double best_rho = rho[k];
      Vector trial = rho;
      for (int j = 0; j < G; ++j) {
        trial[k] = rep.rho_grid[j];
        try {
          const AllocationResult a = assemble(s, mode, trial, up, opt.solve);
          double total = a.bs_power;
          for (double p : up.p_tot) total += p;
          rep.objective_curve[k][j] = a.objective;
          rep.sum_power_curve[k][j] = total;
          if (a.objective < best) {
            best = a.objective;
            best_rho = trial[k];
          }
        } catch (const SolverError& e) {
          if (!recoverable(e)) throw;
          rep.infeasible_points[k].push_back(j);
        }
      }
      if (best_rho != rho[k]) changed = true;
      rho[k] = best_rho;
    }
    if (!changed) break;
  }
  rep.rho_opt = rho;
  try {
    out.allocation = assemble(s, mode, rho, up, opt.solve);
  } catch (const SolverError& e) {
    if (!recoverable(e)) throw;
    fail(ErrorKind::Infeasible, std::string("hybrid: no feasible rho assignment found: ") + e.what());
  }
  return out;
}

}  // namespace swipt

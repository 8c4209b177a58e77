#pragma once

#include <span>

#include "swipt/model.hpp"

namespace swipt {

// Joint downlink problem when every user harvests from all K*N subcarriers:
//   minimize   sum_{l,i} alpha_tilde[l][i] P[l][i]
//   subject to sum_i log2(1 + gamma[l][i] P[l][i]) >= bits[l]        (every l)
//              sum_{l,i} P[l][i] cross[l][i][k] >= p_th[k]            (every k)
//              P >= 0
struct HybridProblem {
  int num_users = 0;
  int subcarriers = 0;
  Matrix alpha_tilde;  // [l][i]
  Matrix gamma;        // [l][i] = (1 - rho_l) g_l^i / sigma_l^i
  Tensor3 cross;       // [l][i][k]
  Vector bits;         // r_dl[l] / B
  Vector p_th;         // [k]
};

// alpha_tilde[l][i] = alpha - sum_k beta_k eta rho_k cross[l][i][k].
// Throws Infeasible when a coefficient is not positive (kappa bound).
Matrix hybrid_alpha_tilde(const CostParameters& costs, double eta, std::span<const double> rho,
                          const Tensor3& cross);

// Hybrid threshold: (U_k + P0 + P0' - battery_k) / (eta rho_k) - sum_{l,i} sigma_ul[l][i].
HybridProblem make_hybrid_problem(const SystemScenario& s, std::span<const double> rho,
                                  std::span<const double> uplink_totals,
                                  std::span<const double> batteries);

// w[l][i] = alpha_tilde[l][i] - sum_m psi_m cross[l][i][m].
Matrix hybrid_weights(const HybridProblem& prob, std::span<const double> psi);

// Per-user water-filling at harvest prices psi: the active sets C_l and
// lambda'_l that the powers p = [lambda'_l / w - 1 / gamma]^+ induce.
// Requires positive weights.
struct HybridPricing {
  Matrix weights;
  Matrix p;
  Vector lambda;
  std::vector<IndexSet> active;
};
HybridPricing price_allocation(const HybridProblem& prob, std::span<const double> psi);

// f_k(psi) = sum_l lambda'_l(psi) sum_{i in C_l} cross[l][i][k] / w[l][i]
//            - sum_l sum_{i in C_l} cross[l][i][k] / gamma[l][i] - p_th[k]
// with lambda'_l = 2^{bits_l/|C_l|} (prod_{i in C_l} gamma/w)^{-1/|C_l|}.
// Users with an empty set contribute nothing. Throws Pole on w == 0 inside a set.
Vector evaluate_f_vec(std::span<const double> psi, const HybridProblem& prob,
                      const std::vector<IndexSet>& active_sets);

// Analytic Jacobian of evaluate_f_vec (product rule on lambda'_l and the ratio sums).
Matrix jacobian(std::span<const double> psi, const HybridProblem& prob,
                const std::vector<IndexSet>& active_sets);

// Magnitude used to make f_k dimensionless: |p_th_k| + sum_{l,i} cross/gamma.
Vector residual_scale(const HybridProblem& prob);

struct NewtonOptions {
  double tol = 1e-5;  // on max_k |f_k| / scale_k
  int max_iterations = 100;
  int max_halvings = 30;
};

struct NewtonResult {
  Vector psi;
  int iterations = 0;
  double residual = 0.0;  // max_k |f_k| / scale_k over constraints with psi_k > 0
  std::vector<bool> frozen;
};

// Damped Newton on f restricted to the harvest constraints that bind. Starts
// from psi0, freezes components whose constraint is slack at zero price and
// re-admits them if they become violated. Throws NonConvergence.
NewtonResult newton_solve(const HybridProblem& prob, std::span<const double> psi0,
                          const NewtonOptions& opt = {});

struct HybridDownlinkSolution {
  Matrix p_dl;
  Vector lambda;
  Vector psi;
  std::vector<IndexSet> active_sets;
  Vector p_th;
  int newton_iterations = 0;
  double residual_norm = 0.0;
  // Newton could not settle (a harvest-dominated corner where some rate
  // constraint goes slack); solved by the primal log-barrier path instead.
  bool used_barrier = false;
};

struct HybridOptions {
  double newton_tol = 1e-11;
  int max_iterations = 100;
  bool allow_barrier = true;
};

HybridDownlinkSolution solve_downlink_hybrid(const HybridProblem& prob,
                                             const HybridOptions& opt = {});

// Largest relative stationarity violation, analogous to the dedicated check.
double hybrid_stationarity_residual(const HybridProblem& prob, const HybridDownlinkSolution& sol);

}  // namespace swipt

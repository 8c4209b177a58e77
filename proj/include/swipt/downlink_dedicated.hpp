#pragma once

#include <span>

#include "swipt/model.hpp"

namespace swipt {

// One user's downlink subproblem when it harvests only from its own subcarriers:
//   minimize   sum_i alpha_tilde_i p_i
//   subject to sum_i B log2(1 + (1-rho) p_i g_i / sigma_i) >= r_dl
//              sum_i p_i g_i >= p_th,  p >= 0
struct DedicatedProblem {
  Vector gains;
  Vector sigmas;
  Vector alpha_tilde;
  double rho = 0.0;
  double r_dl = 0.0;
  double bandwidth = 1.0;
  double p_th = 0.0;

  double quality(int i) const;  // gamma_i = (1-rho) g_i / sigma_i
};

// P_k^th = (sum P_ul + P0 + P0' - P_bat) / (eta rho) - sigma_sum.
// A value <= 0 means the harvest constraint is inactive; with rho = 0 and a
// non-positive requirement the result is -sigma_sum.
double power_threshold(double uplink_total, double p0, double p0_prime, double p_bat, double eta,
                       double rho, double sigma_sum);

// alpha_tilde_i = alpha - beta_k eta rho_k g_i. Throws Infeasible when a
// coefficient on a usable subcarrier is not positive (kappa bound violated).
Vector dedicated_alpha_tilde(double alpha, double beta, double eta, double rho,
                             std::span<const double> gains);

// Builds user k's problem from a scenario; `battery` overrides P_k^bat.
DedicatedProblem make_dedicated_problem(const SystemScenario& s, int k, double rho,
                                        double uplink_total, double battery);

// Multiplier function whose zero is psi on a fixed active set. Evaluated in
// log space; throws Pole when x hits alpha_tilde_i / g_i for some i in the set.
double evaluate_f(double x, const DedicatedProblem& prob, std::span<const int> active_set);

// lambda' for a given psi on a fixed active set.
double compute_lambda(double psi, const DedicatedProblem& prob, std::span<const int> active_set);

struct BisectionOptions {
  double tol_psi = 1e-12;  // relative interval width
  double tol_f = 1e-9;     // residual, relative to the magnitude of f's terms
  double pad = 1e-10;      // endpoint padding as a fraction of the interval width
  int max_iterations = 400;
};

// Scans the even-indexed continuity intervals of f between the ordered poles
// and bisects the first one whose endpoint limits bracket a sign change.
// Returns 0 when p_th <= 0 or f(0) >= 0. Throws Infeasible when no admissible
// interval brackets a root.
double find_psi(const DedicatedProblem& prob, std::span<const int> active_set,
                const BisectionOptions& opt = {});

struct DedicatedDownlinkSolution {
  Vector p_dl;
  double lambda = 0.0;
  double psi = 0.0;
  IndexSet active_set;
  double p_th = 0.0;
  bool rate_binding = false;
  bool harvest_binding = false;
  // The harvest requirement alone forces so much power that the rate
  // constraint is slack: all power sits on the cheapest-per-gain subcarrier,
  // lambda' = 0 and psi = alpha_tilde / g there.
  bool harvest_corner = false;
};

DedicatedDownlinkSolution solve_downlink_dedicated(const DedicatedProblem& prob,
                                                   const BisectionOptions& opt = {});

// Largest relative violation of stationarity over all subcarriers
// (alpha_tilde_i - psi g_i - lambda gamma_i / (1 + gamma_i p_i), with the
// inequality form on inactive subcarriers), normalized by alpha_tilde_i.
double dedicated_stationarity_residual(const DedicatedProblem& prob,
                                       const DedicatedDownlinkSolution& sol);

}  // namespace swipt

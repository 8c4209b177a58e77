#pragma once

// System model shared by every solver: problem instance types and the
// rate / harvest / utility / battery formulas. All quantities are SI:
// powers in W, rates in bit/s, bandwidth in Hz, gains dimensionless.

#include <span>
#include <string>
#include <vector>

namespace swipt {

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;        // [user][subcarrier]
using Tensor3 = std::vector<Matrix>;       // [owner user][subcarrier][receiving user]
using IndexSet = std::vector<int>;

enum class HarvestMode { Dedicated, Hybrid };

const char* to_string(HarvestMode mode);
HarvestMode harvest_mode_from_string(const std::string& name);

struct ChannelSet {
  Matrix downlink_gain;  // |h_BS,k^i|^2
  Matrix uplink_gain;    // |h_k,BS^i|^2
  // cross_gain[l][i][k]: gain from the BS subcarrier serving user l (index i)
  // to user k. Empty unless hybrid harvesting is modeled. The diagonal
  // cross_gain[k][i][k] must equal downlink_gain[k][i].
  Tensor3 cross_gain;

  bool has_cross() const { return !cross_gain.empty(); }
};

struct NoisePowers {
  Matrix sigma_dl;
  Matrix sigma_ul;
};

struct RateThresholds {
  Vector r_dl;
  Vector r_ul;
};

struct CostParameters {
  double alpha = 1.0;    // cost per W radiated by the BS
  double varsigma = 0.0; // fixed BS cost offset
  Vector beta;           // per-user battery cost weight

  // alpha = pi * dt * theta, varsigma = pi * dt * offset.
  static CostParameters from_tariff(double theta, double price, double delta_t,
                                    double offset, Vector beta);
  // beta_k = kappa * alpha for every user.
  static CostParameters from_kappa(double alpha, double varsigma, double kappa,
                                   int num_users);

  double kappa(int k) const { return beta.at(k) / alpha; }
};

struct SystemScenario {
  int num_users = 1;
  int subcarriers = 1;
  double bandwidth = 15e3;
  ChannelSet channels;
  NoisePowers noise;
  RateThresholds rates;
  CostParameters costs;
  Vector battery;  // P_k^bat
  double eta = 0.8;
  double p0 = 0.0;
  double p0_prime = 0.0;
};

// Throws SolverError(InvalidInput) naming the first violated invariant.
// `need_cross` additionally requires a populated, diagonal-consistent cross tensor.
void validate(const SystemScenario& s, bool need_cross = false);

struct AllocationResult {
  HarvestMode mode = HarvestMode::Dedicated;
  Matrix p_ul;
  Matrix p_dl;
  Vector rho;
  Vector nu;       // uplink water levels
  Vector lambda;   // downlink rate multipliers (lambda')
  Vector psi;      // harvest multipliers
  Vector p_th;     // harvest thresholds used by the downlink solve
  std::vector<IndexSet> uplink_active;
  std::vector<IndexSet> downlink_active;
  double objective = 0.0;  // full power utility
  double bs_power = 0.0;   // sum of downlink powers
  int newton_iterations = 0;
  double residual = 0.0;
  bool used_barrier = false;
};

double downlink_rate(std::span<const double> p, double rho, std::span<const double> gains,
                     std::span<const double> sigmas, double bandwidth);

double uplink_rate(std::span<const double> p, std::span<const double> gains,
                   std::span<const double> sigmas, double bandwidth);

// Q_k per user. Dedicated: eta*rho_k*sum_i (P_k^i g_k^i + sigma_k^i).
// Hybrid: eta*rho_k*sum_l sum_i (P_l^i cross[l][i][k] + sigma_l^i).
Vector harvested_power(const SystemScenario& s, const Matrix& p_dl, std::span<const double> rho,
                       HarvestMode mode);

// P_k^tot = P0 + P0' + sum_i P_k,BS^i
double total_user_power(const SystemScenario& s, int k, std::span<const double> p_ul_row);

// alpha * sum P_dl + varsigma + sum_k beta_k (P_k^tot - Q_k), evaluated unclamped.
double power_utility(const SystemScenario& s, const Matrix& p_dl, const Matrix& p_ul,
                     std::span<const double> rho, HarvestMode mode);
double power_utility(const SystemScenario& s, const AllocationResult& a);

struct BatteryStep {
  double level = 0.0;
  bool depleted = false;
};

// max(0, P + q - p_proc); a shortfall beyond 1e-12 of the largest operand depletes.
BatteryStep battery_step(double p_bat, double harvested, double p_proc);

}  // namespace swipt

#include "swipt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "swipt/error.hpp"

namespace swipt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::NonConvergence: return "non_convergence";
    case ErrorKind::Pole: return "pole";
  }
  return "unknown";
}

const char* to_string(HarvestMode mode) {
  return mode == HarvestMode::Dedicated ? "dedicated" : "hybrid";
}

HarvestMode harvest_mode_from_string(const std::string& name) {
  if (name == "dedicated") return HarvestMode::Dedicated;
  if (name == "hybrid") return HarvestMode::Hybrid;
  fail(ErrorKind::InvalidInput, "unknown harvest mode '" + name + "'");
}

CostParameters CostParameters::from_tariff(double theta, double price, double delta_t,
                                           double offset, Vector beta) {
  CostParameters c;
  c.alpha = price * delta_t * theta;
  c.varsigma = price * delta_t * offset;
  c.beta = std::move(beta);
  return c;
}

CostParameters CostParameters::from_kappa(double alpha, double varsigma, double kappa,
                                          int num_users) {
  CostParameters c;
  c.alpha = alpha;
  c.varsigma = varsigma;
  c.beta.assign(static_cast<std::size_t>(num_users), kappa * alpha);
  return c;
}

namespace {

void check_matrix(const Matrix& m, int rows, int cols, const char* name) {
  require(static_cast<int>(m.size()) == rows, std::string(name) + ": expected " +
                                                  std::to_string(rows) + " rows");
  for (const auto& row : m)
    require(static_cast<int>(row.size()) == cols,
            std::string(name) + ": expected " + std::to_string(cols) + " columns");
}

void check_vector(const Vector& v, int n, const char* name) {
  require(static_cast<int>(v.size()) == n,
          std::string(name) + ": expected length " + std::to_string(n));
}

void check_same_size(std::size_t a, std::size_t b, std::size_t c) {
  require(a == b && b == c, "dimension mismatch between powers, gains and noise");
}

}  // namespace

void validate(const SystemScenario& s, bool need_cross) {
  const int K = s.num_users;
  const int N = s.subcarriers;
  require(K >= 1, "num_users must be >= 1");
  require(N >= 1, "subcarriers must be >= 1");
  require(s.bandwidth > 0.0, "bandwidth must be > 0");
  require(s.eta > 0.0 && s.eta < 1.0, "eta must lie in (0,1)");
  require(s.p0 >= 0.0 && s.p0_prime >= 0.0, "p0 and p0_prime must be >= 0");
  check_matrix(s.channels.downlink_gain, K, N, "channels.downlink_gain");
  check_matrix(s.channels.uplink_gain, K, N, "channels.uplink_gain");
  check_matrix(s.noise.sigma_dl, K, N, "noise.sigma_dl");
  check_matrix(s.noise.sigma_ul, K, N, "noise.sigma_ul");
  check_vector(s.rates.r_dl, K, "rates.r_dl");
  check_vector(s.rates.r_ul, K, "rates.r_ul");
  check_vector(s.costs.beta, K, "costs.beta");
  check_vector(s.battery, K, "battery");
  require(s.costs.alpha > 0.0, "costs.alpha must be > 0");
  for (int k = 0; k < K; ++k) {
    require(s.rates.r_dl[k] >= 0.0 && s.rates.r_ul[k] >= 0.0, "rate thresholds must be >= 0");
    require(s.costs.beta[k] >= 0.0, "costs.beta must be >= 0");
    require(s.battery[k] >= 0.0, "battery powers must be >= 0");
    bool any_dl = false;
    bool any_ul = false;
    for (int i = 0; i < N; ++i) {
      const double gd = s.channels.downlink_gain[k][i];
      const double gu = s.channels.uplink_gain[k][i];
      require(gd >= 0.0 && gu >= 0.0, "channel gains must be >= 0");
      require(s.noise.sigma_dl[k][i] > 0.0 && s.noise.sigma_ul[k][i] > 0.0,
              "noise powers must be > 0");
      any_dl = any_dl || gd > 0.0;
      any_ul = any_ul || gu > 0.0;
    }
    require(any_dl && any_ul, "user " + std::to_string(k) +
                                  " needs a positive gain in each direction");
  }
  if (need_cross || s.channels.has_cross()) {
    const auto& x = s.channels.cross_gain;
    require(static_cast<int>(x.size()) == K, "channels.cross_gain: expected K owner blocks");
    for (int l = 0; l < K; ++l) {
      check_matrix(x[l], N, K, "channels.cross_gain[l]");
      for (int i = 0; i < N; ++i) {
        for (int k = 0; k < K; ++k) require(x[l][i][k] >= 0.0, "cross gains must be >= 0");
        require(x[l][i][l] == s.channels.downlink_gain[l][i],
                "channels.cross_gain diagonal must equal downlink_gain");
      }
    }
  }
}

double downlink_rate(std::span<const double> p, double rho, std::span<const double> gains,
                     std::span<const double> sigmas, double bandwidth) {
  check_same_size(p.size(), gains.size(), sigmas.size());
  require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0,1]");
  double bits = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    bits += std::log2(1.0 + (1.0 - rho) * p[i] * gains[i] / sigmas[i]);
  return bandwidth * bits;
}

double uplink_rate(std::span<const double> p, std::span<const double> gains,
                   std::span<const double> sigmas, double bandwidth) {
  check_same_size(p.size(), gains.size(), sigmas.size());
  double bits = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) bits += std::log2(1.0 + p[i] * gains[i] / sigmas[i]);
  return bandwidth * bits;
}

Vector harvested_power(const SystemScenario& s, const Matrix& p_dl, std::span<const double> rho,
                       HarvestMode mode) {
  const int K = s.num_users;
  const int N = s.subcarriers;
  check_matrix(p_dl, K, N, "p_dl");
  require(static_cast<int>(rho.size()) == K, "rho: expected one ratio per user");
  Vector q(static_cast<std::size_t>(K), 0.0);
  if (mode == HarvestMode::Dedicated) {
    for (int k = 0; k < K; ++k) {
      double received = 0.0;
      for (int i = 0; i < N; ++i)
        received += p_dl[k][i] * s.channels.downlink_gain[k][i] + s.noise.sigma_dl[k][i];
      q[k] = s.eta * rho[k] * received;
    }
    return q;
  }
  require(s.channels.has_cross(), "hybrid harvesting requires cross gains");
  double noise = 0.0;
  for (int l = 0; l < K; ++l)
    for (int i = 0; i < N; ++i) noise += s.noise.sigma_dl[l][i];
  for (int k = 0; k < K; ++k) {
    double received = noise;
    for (int l = 0; l < K; ++l)
      for (int i = 0; i < N; ++i) received += p_dl[l][i] * s.channels.cross_gain[l][i][k];
    q[k] = s.eta * rho[k] * received;
  }
  return q;
}

double total_user_power(const SystemScenario& s, int k, std::span<const double> p_ul_row) {
  (void)k;
  return s.p0 + s.p0_prime + std::accumulate(p_ul_row.begin(), p_ul_row.end(), 0.0);
}

double power_utility(const SystemScenario& s, const Matrix& p_dl, const Matrix& p_ul,
                     std::span<const double> rho, HarvestMode mode) {
  check_matrix(p_ul, s.num_users, s.subcarriers, "p_ul");
  const Vector q = harvested_power(s, p_dl, rho, mode);
  double bs = 0.0;
  for (const auto& row : p_dl) bs += std::accumulate(row.begin(), row.end(), 0.0);
  double value = s.costs.alpha * bs + s.costs.varsigma;
  for (int k = 0; k < s.num_users; ++k)
    value += s.costs.beta[k] * (total_user_power(s, k, p_ul[k]) - q[k]);
  return value;
}

double power_utility(const SystemScenario& s, const AllocationResult& a) {
  return power_utility(s, a.p_dl, a.p_ul, a.rho, a.mode);
}

BatteryStep battery_step(double p_bat, double harvested, double p_proc) {
  const double next = p_bat + harvested - p_proc;
  // A shortfall within rounding of the operands leaves an empty, live battery.
  const double slack = 1e-12 * std::max({std::abs(p_bat), std::abs(harvested), std::abs(p_proc)});
  if (next < -slack) return {0.0, true};
  return {std::max(next, 0.0), false};
}

}  // namespace swipt

#pragma once
// Random cell scenarios: users uniformly placed in a unit cell, Rayleigh
// fading with a distance-scaled mean, thermal noise N0 * B per subcarrier.

#include <cstdint>
#include <optional>
#include <random>

#include "swipt/model.hpp"

namespace swipt {

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);
double db_to_linear(double db);

// Noise power N0 * B in watts from a density in dBm/Hz.
double noise_power(double noise_dbm_per_hz, double bandwidth_hz);

// 64-bit seed derived from a master seed and a path of indices (splitmix64 chain).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

// Uniform on [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng);

// Rayleigh amplitude whose distribution mean is `mean` (scale mean * sqrt(2/pi)).
// Exact zeros are redrawn.
double draw_amplitude(std::mt19937_64& rng, double mean);

struct ScenarioSpec {
  int num_users = 1;
  int subcarriers = 5;
  double bandwidth_hz = 15e3;
  double noise_dbm_per_hz = -174.0;
  double pathloss_exponent = 3.0;
  double cell_radius = 1.0;  // d0; distances are normalized to it
  // Target mean per-subcarrier SNR, E[g] * P_ref / sigma. Without a target
  // the raw distance-scaled fading is used.
  std::optional<double> snr_dl_db;
  std::optional<double> snr_ul_db;
  // Reference transmit power of the SNR definition. Unset means sigma
  // itself, i.e. E[g] equals the linear SNR.
  std::optional<double> snr_reference_power_w;
  double r_dl_bps = 15e3;
  double r_ul_bps = 30e3;
  double alpha = 1.0;
  double varsigma = 0.0;
  double kappa = 0.0;         // beta_k = kappa * alpha unless beta is given
  std::optional<Vector> beta;
  double battery_w = 0.0;     // initial P_k^bat for every user
  double eta = 0.8;
  double p0 = 0.0;
  double p0_prime = 0.0;
  bool cross_gains = true;    // populate the tensor needed by hybrid harvesting
  std::optional<Vector> distances;  // fixed normalized distances in (0, 1]

  double sigma() const { return noise_power(noise_dbm_per_hz, bandwidth_hz); }
  double reference_power() const { return snr_reference_power_w.value_or(sigma()); }
};

// Throws SolverError(InvalidInput) naming the offending field.
void validate(const ScenarioSpec& spec);

// Deterministic in (spec, seed). Draw order: distances, downlink gains,
// uplink gains, then the off-diagonal cross gains.
SystemScenario generate(const ScenarioSpec& spec, std::uint64_t seed);

}  // namespace swipt

#include "swipt/scenario.hpp"

#include <cmath>
#include <numbers>

#include "swipt/error.hpp"

namespace swipt {

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watt_to_dbm(double watt) {
  require(watt > 0.0, "watt_to_dbm: power must be > 0");
  return 10.0 * std::log10(watt) + 30.0;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double noise_power(double noise_dbm_per_hz, double bandwidth_hz) {
  require(std::isfinite(noise_dbm_per_hz), "noise_dbm_per_hz must be finite");
  require(bandwidth_hz > 0.0, "bandwidth must be > 0");
  return dbm_to_watt(noise_dbm_per_hz) * bandwidth_hz;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  return splitmix64(s ^ c);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double draw_amplitude(std::mt19937_64& rng, double mean) {
  const double scale = mean * std::sqrt(2.0 / std::numbers::pi);
  for (;;) {
    const double u = uniform01(rng);
    const double a = scale * std::sqrt(-2.0 * std::log1p(-u));
    if (a > 0.0) return a;
  }
}

void validate(const ScenarioSpec& spec) {
  require(spec.num_users >= 1, "num_users must be >= 1");
  require(spec.subcarriers >= 1, "subcarriers must be >= 1");
  require(spec.bandwidth_hz > 0.0, "bandwidth_hz must be > 0");
  require(std::isfinite(spec.noise_dbm_per_hz), "noise_dbm_per_hz must be finite");
  require(spec.pathloss_exponent > 0.0, "pathloss_exponent must be > 0");
  require(spec.cell_radius > 0.0, "cell_radius must be > 0");
  if (spec.snr_reference_power_w)
    require(*spec.snr_reference_power_w > 0.0, "snr_reference_power_w must be > 0");
  if (spec.snr_dl_db) require(std::isfinite(*spec.snr_dl_db), "snr_dl_db must be finite");
  if (spec.snr_ul_db) require(std::isfinite(*spec.snr_ul_db), "snr_ul_db must be finite");
  require(spec.r_dl_bps >= 0.0, "r_dl_bps must be >= 0");
  require(spec.r_ul_bps >= 0.0, "r_ul_bps must be >= 0");
  require(spec.alpha > 0.0, "alpha must be > 0");
  require(spec.kappa >= 0.0, "kappa must be >= 0");
  if (spec.beta) {
    require(static_cast<int>(spec.beta->size()) == spec.num_users, "beta needs one entry per user");
    for (double b : *spec.beta) require(b >= 0.0, "beta entries must be >= 0");
  }
  require(spec.battery_w >= 0.0, "battery_w must be >= 0");
  require(spec.eta > 0.0 && spec.eta < 1.0, "eta must lie in (0,1)");
  require(spec.p0 >= 0.0 && spec.p0_prime >= 0.0, "p0 and p0_prime must be >= 0");
  if (spec.distances) {
    require(static_cast<int>(spec.distances->size()) == spec.num_users,
            "distances needs one entry per user");
    for (double d : *spec.distances)
      require(d > 0.0 && d <= 1.0, "distances must lie in (0, 1]");
  }
}

SystemScenario generate(const ScenarioSpec& spec, std::uint64_t seed) {
  validate(spec);
  const int K = spec.num_users;
  const int N = spec.subcarriers;
  std::mt19937_64 rng(seed);

  Vector dist(K);
  for (int k = 0; k < K; ++k)
    dist[k] = spec.distances ? (*spec.distances)[k] : 1.0 - uniform01(rng);  // (0, 1]

  // Amplitude mean sqrt((d0 / d)^a) with d normalized to d0.
  Vector mean(K);
  for (int k = 0; k < K; ++k) mean[k] = std::sqrt(std::pow(1.0 / dist[k], spec.pathloss_exponent));

  const double sigma = spec.sigma();
  const double p_ref = spec.reference_power();
  // Multiplier taking E[g | d_k] = 4 m^2 / pi to the SNR target.
  auto normalizer = [&](const std::optional<double>& snr_db, int k) {
    if (!snr_db) return 1.0;
    const double target = db_to_linear(*snr_db) * sigma / p_ref;
    return target / (4.0 * mean[k] * mean[k] / std::numbers::pi);
  };

  SystemScenario s;
  s.num_users = K;
  s.subcarriers = N;
  s.bandwidth = spec.bandwidth_hz;
  s.channels.downlink_gain.assign(K, Vector(N));
  s.channels.uplink_gain.assign(K, Vector(N));
  for (int k = 0; k < K; ++k) {
    const double c = normalizer(spec.snr_dl_db, k);
    for (int i = 0; i < N; ++i) {
      const double a = draw_amplitude(rng, mean[k]);
      s.channels.downlink_gain[k][i] = a * a * c;
    }
  }
  for (int k = 0; k < K; ++k) {
    const double c = normalizer(spec.snr_ul_db, k);
    for (int i = 0; i < N; ++i) {
      const double a = draw_amplitude(rng, mean[k]);
      s.channels.uplink_gain[k][i] = a * a * c;
    }
  }
  if (spec.cross_gains) {
    // cross[l][i][k]: user k's channel on the subcarrier that carries user l's data.
    s.channels.cross_gain.assign(K, Matrix(N, Vector(K)));
    for (int l = 0; l < K; ++l)
      for (int i = 0; i < N; ++i)
        for (int k = 0; k < K; ++k) {
          if (k == l) {
            s.channels.cross_gain[l][i][k] = s.channels.downlink_gain[l][i];
          } else {
            const double a = draw_amplitude(rng, mean[k]);
            s.channels.cross_gain[l][i][k] = a * a * normalizer(spec.snr_dl_db, k);
          }
        }
  }
  s.noise.sigma_dl.assign(K, Vector(N, sigma));
  s.noise.sigma_ul.assign(K, Vector(N, sigma));
  s.rates.r_dl.assign(K, spec.r_dl_bps);
  s.rates.r_ul.assign(K, spec.r_ul_bps);
  if (spec.beta) {
    s.costs.alpha = spec.alpha;
    s.costs.varsigma = spec.varsigma;
    s.costs.beta = *spec.beta;
  } else {
    s.costs = CostParameters::from_kappa(spec.alpha, spec.varsigma, spec.kappa, K);
  }
  s.battery.assign(K, spec.battery_w);
  s.eta = spec.eta;
  s.p0 = spec.p0;
  s.p0_prime = spec.p0_prime;
  validate(s, spec.cross_gains);
  return s;
}

}  // namespace swipt

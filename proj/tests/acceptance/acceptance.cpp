// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance <path to swipt executable> <scratch dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "oracles.hpp"
#include "random_instances.hpp"
#include "swipt/downlink_dedicated.hpp"
#include "swipt/downlink_hybrid.hpp"
#include "swipt/error.hpp"
#include "swipt/oracle.hpp"
#include "swipt/simulation.hpp"
#include "swipt/sweep.hpp"
#include "swipt/uplink.hpp"

using namespace swipt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body,
               double time_limit_s = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit_s > 0.0 && secs > time_limit_s) {
    o.pass = false;
    o.detail += fmt::format("; over the {:.0f} s limit", time_limit_s);
  }
  if (!o.pass) ++failures;
  fmt::print("{} {}: {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", name, o.detail, secs);
  std::fflush(stdout);
}

double sum(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ---------------------------------------------------------------------------
// Broad instances: thresholds from 0.3 to 3 times the harvest the rate target
// alone delivers, including harvest-dominated corners.

struct DedicatedInstance {
  std::vector<DedicatedProblem> users;
};

DedicatedInstance dedicated_instance(std::mt19937_64& rng, int K, int N) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SystemScenario s = testgen::scenario(rng, K, N);
  DedicatedInstance inst;
  for (int k = 0; k < K; ++k) {
    DedicatedProblem p = make_dedicated_problem(s, k, 0.1 + 0.8 * u(rng), 0.0, 0.0);
    p.p_th = 0.0;
    const DedicatedDownlinkSolution base = solve_downlink_dedicated(p);
    p.p_th = dot(p.gains, base.p_dl) * (0.3 + 2.7 * u(rng));
    inst.users.push_back(std::move(p));
  }
  return inst;
}

Vector hybrid_harvest(const HybridProblem& p, const Matrix& x) {
  Vector h(p.num_users, 0.0);
  for (int l = 0; l < p.num_users; ++l)
    for (int i = 0; i < p.subcarriers; ++i)
      for (int k = 0; k < p.num_users; ++k) h[k] += x[l][i] * p.cross[l][i][k];
  return h;
}

double hybrid_rate_bits(const HybridProblem& p, int l, const Vector& x) {
  double r = 0.0;
  for (int i = 0; i < p.subcarriers; ++i) r += std::log2(1.0 + p.gamma[l][i] * x[i]);
  return r;
}

// Planted instances: pick harvest prices psi* that keep every weight
// alpha_tilde - psi* . cross positive, water-fill each user at those weights,
// and set the thresholds to the resulting harvest (binding where psi* > 0,
// loose otherwise). That allocation satisfies every KKT condition with the
// rate constraints binding, so it is the optimum and its objective is known.

struct PlantedDedicated {
  DedicatedProblem prob;
  double objective = 0.0;
};

PlantedDedicated planted_dedicated(const SystemScenario& s, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlantedDedicated out;
  DedicatedProblem& p = out.prob;
  p = make_dedicated_problem(s, k, 0.1 + 0.8 * u(rng), 0.0, 0.0);
  const std::size_t N = p.gains.size();
  double cap = INFINITY;
  for (std::size_t i = 0; i < N; ++i) cap = std::min(cap, p.alpha_tilde[i] / p.gains[i]);
  const bool priced = u(rng) < 0.7;
  const double psi = priced ? cap * (0.05 + 0.85 * u(rng)) : 0.0;
  Vector w(N), q(N), x;
  for (std::size_t i = 0; i < N; ++i) {
    w[i] = p.alpha_tilde[i] - psi * p.gains[i];
    q[i] = p.quality(static_cast<int>(i));
  }
  oracle_ref::water_fill(w, q, p.r_dl / p.bandwidth, x);
  p.p_th = dot(p.gains, x) * (priced ? 1.0 : 0.3 + 0.65 * u(rng));
  out.objective = dot(p.alpha_tilde, x);
  return out;
}

struct PlantedHybrid {
  HybridProblem prob;
  double objective = 0.0;
  int priced = 0;
};

// Largest psi scale keeping every weight positive along `dir`.
double admissible_scale(const HybridProblem& p, const Vector& dir) {
  double t = 1e300;
  for (int l = 0; l < p.num_users; ++l)
    for (int i = 0; i < p.subcarriers; ++i) {
      double h = 0.0;
      for (int k = 0; k < p.num_users; ++k) h += dir[k] * p.cross[l][i][k];
      if (h > 0.0) t = std::min(t, p.alpha_tilde[l][i] / h);
    }
  return t;
}

PlantedHybrid planted_hybrid(std::mt19937_64& rng, int K, int N) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlantedHybrid out;
  HybridProblem& p = out.prob;
  p = testgen::hybrid_problem(rng, K, N);
  Vector dir(K, 0.0);
  for (int k = 0; k < K; ++k)
    if (u(rng) < 0.7) {
      dir[k] = 0.1 + u(rng);
      ++out.priced;
    }
  Vector psi(K, 0.0);
  if (out.priced > 0) {
    const double t = admissible_scale(p, dir) * (0.05 + 0.85 * u(rng));
    for (int k = 0; k < K; ++k) psi[k] = t * dir[k];
  }
  Matrix x(K);
  for (int l = 0; l < K; ++l) {
    Vector w(N);
    for (int i = 0; i < N; ++i) {
      w[i] = p.alpha_tilde[l][i];
      for (int m = 0; m < K; ++m) w[i] -= psi[m] * p.cross[l][i][m];
    }
    oracle_ref::water_fill(w, p.gamma[l], p.bits[l], x[l]);
    out.objective += dot(p.alpha_tilde[l], x[l]);
  }
  const Vector h = hybrid_harvest(p, x);
  for (int k = 0; k < K; ++k) p.p_th[k] = h[k] * (psi[k] > 0.0 ? 1.0 : 0.3 + 0.65 * u(rng));
  return out;
}

struct KktTally {
  int allocations = 0;
  int users = 0;
  int priced = 0;
  double worst_rate = 0.0;     // |rate / target - 1|
  double worst_harvest = 0.0;  // (p_th - harvest)_+ / p_th
  double worst_cs = 0.0;       // psi |harvest - p_th| / objective
  double worst_stationarity = 0.0;
  double worst_objective = 0.0;  // against the planted optimum
  int negative_power = 0;
  int negative_psi = 0;

  void user(double rate_rel, double h, double p_th, double psi, double objective) {
    ++users;
    priced += psi > 0.0;
    worst_rate = std::max(worst_rate, rate_rel);
    if (p_th > 0.0) worst_harvest = std::max(worst_harvest, (p_th - h) / p_th);
    worst_cs = std::max(worst_cs, psi * std::abs(h - p_th) / objective);
    if (psi < 0.0) ++negative_psi;
  }
};

const int kSizesK[] = {1, 2, 4};
const int kSizesN[] = {2, 5, 8};

// Cycles through the nine (K, N) pairs.
template <class F>
void for_each_size(int count, F&& f) {
  for (int t = 0; t < count; ++t) f(t, kSizesK[t % 3], kSizesN[(t / 3) % 3]);
}

// 200 allocations: 100 per mode.
Outcome kkt_suite() {
  KktTally tally;
  std::mt19937_64 rng(20240501);
  for_each_size(100, [&](int, int K, int N) {
    const SystemScenario s = testgen::scenario(rng, K, N);
    ++tally.allocations;
    for (int k = 0; k < K; ++k) {
      const PlantedDedicated pl = planted_dedicated(s, k, rng);
      const DedicatedProblem& p = pl.prob;
      const DedicatedDownlinkSolution sol = solve_downlink_dedicated(p);
      const double rate = downlink_rate(sol.p_dl, p.rho, p.gains, p.sigmas, p.bandwidth);
      const double obj = dot(p.alpha_tilde, sol.p_dl);
      tally.user(std::abs(rate / p.r_dl - 1.0), dot(p.gains, sol.p_dl), p.p_th, sol.psi, obj);
      tally.worst_objective = std::max(tally.worst_objective, std::abs(obj / pl.objective - 1.0));
      tally.worst_stationarity =
          std::max(tally.worst_stationarity, dedicated_stationarity_residual(p, sol));
      for (double x : sol.p_dl) tally.negative_power += x < 0.0;
    }
  });
  for_each_size(100, [&](int, int K, int N) {
    const PlantedHybrid pl = planted_hybrid(rng, K, N);
    const HybridProblem& p = pl.prob;
    const HybridDownlinkSolution sol = solve_downlink_hybrid(p);
    ++tally.allocations;
    const Vector h = hybrid_harvest(p, sol.p_dl);
    double objective = 0.0;
    for (int l = 0; l < K; ++l) objective += dot(p.alpha_tilde[l], sol.p_dl[l]);
    tally.worst_objective = std::max(tally.worst_objective, std::abs(objective / pl.objective - 1.0));
    for (int k = 0; k < K; ++k)
      tally.user(std::abs(hybrid_rate_bits(p, k, sol.p_dl[k]) / p.bits[k] - 1.0), h[k], p.p_th[k],
                 sol.psi[k], objective);
    tally.worst_stationarity =
        std::max(tally.worst_stationarity, hybrid_stationarity_residual(p, sol));
    for (const auto& row : sol.p_dl)
      for (double x : row) tally.negative_power += x < 0.0;
  });
  const bool pass = tally.worst_rate <= 1e-6 && tally.worst_harvest <= 1e-6 &&
                    tally.worst_cs <= 1e-6 && tally.negative_power == 0 && tally.negative_psi == 0;
  return {pass, fmt::format("{} allocations, {} users ({} with priced harvest); max rate gap "
                            "{:.2e}, max harvest shortfall {:.2e}, max slackness residual {:.2e}, "
                            "max stationarity {:.2e}, max gap to planted optimum {:.2e}, negative "
                            "powers {}, negative psi {}",
                            tally.allocations, tally.users, tally.priced, tally.worst_rate,
                            tally.worst_harvest, tally.worst_cs, tally.worst_stationarity,
                            tally.worst_objective, tally.negative_power, tally.negative_psi)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int fails = 0;
  for (int t = 0; t < 50; ++t) {
    const int N = t % 5 == 0 ? 1 : 2;
    const DedicatedProblem p = dedicated_instance(rng, 1, N).users[0];
    const DedicatedDownlinkSolution sol = solve_downlink_dedicated(p);
    const double obj = dot(p.alpha_tilde, sol.p_dl);
    GridSpec g;
    g.box_upper = 10.0 * sum(sol.p_dl);
    const OracleResult o = grid_minimize_dedicated(p, g);
    const double gap = o.feasible ? std::abs(o.objective - obj) / obj : INFINITY;
    worst = std::max(worst, gap);
    fails += !(gap <= 0.01);
  }
  double worst_h = 0.0;
  for (int t = 0; t < 20; ++t) {
    const HybridProblem p = testgen::hybrid_problem(rng, 2, 2);
    const HybridDownlinkSolution sol = solve_downlink_hybrid(p);
    double obj = 0.0, total = 0.0;
    for (int l = 0; l < 2; ++l) {
      obj += dot(p.alpha_tilde[l], sol.p_dl[l]);
      total += sum(sol.p_dl[l]);
    }
    GridSpec g;
    g.box_upper = 10.0 * total;
    const OracleResult o = grid_minimize_hybrid(p, g);
    const double gap = o.feasible ? std::abs(o.objective - obj) / obj : INFINITY;
    worst_h = std::max(worst_h, gap);
    fails += !(gap <= 0.01);
  }
  return {fails == 0, fmt::format("50 dedicated (K=1, N<=2) max gap {:.2e}; 20 hybrid (K=2, N=2) "
                                  "max gap {:.2e}; {} over 1%",
                                  worst, worst_h, fails)};
}

Outcome jacobian_check() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int K = 1 + t % 4;
    const int N = 2 + (t / 4) % 5;
    const HybridProblem p = testgen::hybrid_problem(rng, K, N);
    Vector dir(K);
    for (double& v : dir) v = u(rng);
    const double tmax = admissible_scale(p, dir);
    Vector psi(K);
    for (int k = 0; k < K; ++k) psi[k] = dir[k] * tmax * 0.6 * u(rng);
    const auto sets = price_allocation(p, psi).active;
    const Matrix J = jacobian(psi, p, sets);
    const Vector scale = residual_scale(p);
    for (int j = 0; j < K; ++j) {
      const double h = 1e-6 * std::max(tmax, 1e-12);
      Vector a = psi, b = psi;
      a[j] += h;
      b[j] -= h;
      const Vector fa = oracle_ref::f_hybrid_hp(a, p.alpha_tilde, p.gamma, p.cross, p.bits, p.p_th, sets);
      const Vector fb = oracle_ref::f_hybrid_hp(b, p.alpha_tilde, p.gamma, p.cross, p.bits, p.p_th, sets);
      for (int k = 0; k < K; ++k) {
        const double fd = (fa[k] - fb[k]) / (2.0 * h);
        // Exactly-zero derivatives (single-subcarrier sets) are compared
        // against the natural scale of f per unit price.
        const double denom = std::max(std::abs(fd), 1e-10 * scale[k] / tmax);
        worst = std::max(worst, std::abs(J[k][j] - fd) / denom);
      }
    }
  }
  return {worst <= 1e-4,
          fmt::format("50 admissible points, K in 1..4; max relative error {:.2e}", worst)};
}

Outcome newton_accuracy() {
  std::mt19937_64 rng(20240502);
  int total = 0, converged = 0, over_iter = 0, binding = 0;
  double worst_res = 0.0;
  int max_iter = 0;
  for_each_size(200, [&](int, int K, int N) {
    const HybridProblem p = planted_hybrid(rng, K, N).prob;
    ++total;
    NewtonOptions opt;
    opt.tol = 1e-5;
    opt.max_iterations = 100;
    try {
      const NewtonResult r = newton_solve(p, Vector(K, 0.0), opt);
      if (r.iterations > 100) ++over_iter;
      max_iter = std::max(max_iter, r.iterations);
      worst_res = std::max(worst_res, r.residual);
      binding += std::any_of(r.psi.begin(), r.psi.end(), [](double x) { return x > 0.0; });
      if (r.residual <= 1e-5 && r.iterations <= 100) ++converged;
    } catch (const SolverError&) {
    }
  });
  const double rate = static_cast<double>(converged) / total;
  return {rate >= 0.95 && over_iter == 0 && worst_res <= 1e-5,
          fmt::format("{}/{} converged ({:.1f}%), {} with a priced harvest constraint; max "
                      "iterations {}, max scaled residual {:.2e}",
                      converged, total, 100.0 * rate, binding, max_iter, worst_res)};
}

DedicatedProblem random_dedicated(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DedicatedProblem p;
  p.gains.resize(n);
  p.sigmas.resize(n);
  p.alpha_tilde.resize(n);
  for (int i = 0; i < n; ++i) {
    p.gains[i] = 0.1 + 2.0 * u(rng);
    p.sigmas[i] = 0.05 + u(rng);
    p.alpha_tilde[i] = 0.2 + u(rng);
  }
  p.rho = 0.05 + 0.9 * u(rng);
  p.bandwidth = 1.0;
  p.r_dl = 0.2 + 5.0 * u(rng);
  p.p_th = 12.0 * u(rng);
  return p;
}

Outcome f_monotonicity() {
  std::mt19937_64 rng(31);
  long samples = 0, violations = 0;
  int intervals = 0;
  for (int t = 0; t < 50; ++t) {
    const DedicatedProblem p = random_dedicated(rng, 1 + t % 8);
    IndexSet set(p.gains.size());
    for (std::size_t i = 0; i < set.size(); ++i) set[i] = static_cast<int>(i);
    Vector poles;
    for (std::size_t i = 0; i < p.gains.size(); ++i) poles.push_back(p.alpha_tilde[i] / p.gains[i]);
    std::sort(poles.begin(), poles.end());
    // f is real-valued where an even number of weights are negative.
    for (std::size_t l = 0; l <= poles.size(); l += 2) {
      const double a = l == 0 ? 0.0 : poles[l - 1];
      const double b = l < poles.size() ? poles[l] : a + 10.0 * (poles.back() + 1.0);
      if (!(b > a)) continue;
      ++intervals;
      double prev = -INFINITY;
      for (int j = 1; j < 400; ++j) {
        const double x = a + (b - a) * j / 400.0;
        const double f = evaluate_f(x, p, set);
        ++samples;
        if (f < prev - 1e-9 * std::max(1.0, std::abs(prev))) ++violations;
        prev = f;
      }
    }
  }
  return {violations == 0, fmt::format("50 instances, {} intervals, {} samples; {} decreases",
                                       intervals, samples, violations)};
}

// ---------------------------------------------------------------------------
// Figure trends from the sweep presets.

using MeanCurve = std::map<std::string, std::vector<std::pair<double, double>>>;

MeanCurve means(const SweepTable& t, const std::string& metric) {
  const auto it = std::find(t.metric_names.begin(), t.metric_names.end(), metric);
  const std::size_t m = static_cast<std::size_t>(it - t.metric_names.begin());
  MeanCurve out;
  for (const SweepRow& r : t.means) out[r.series].push_back({r.x, r.metrics[m]});
  for (auto& [_, v] : out) std::sort(v.begin(), v.end());
  return out;
}

std::size_t metric_index(const SweepTable& t, const std::string& metric) {
  return static_cast<std::size_t>(
      std::find(t.metric_names.begin(), t.metric_names.end(), metric) - t.metric_names.begin());
}

Outcome fig3_shape() {
  SweepConfig c = preset_config("fig3");
  c.repetitions = 100;
  c.seed = 3;
  const SweepTable t = run_sweep(c);
  const MeanCurve obj = means(t, "objective");
  bool interior = true;
  std::string minima;
  for (const auto& [name, pts] : obj) {
    std::size_t j = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i].second < pts[j].second) j = i;
    interior = interior && j > 0 && j + 1 < pts.size();
    minima += fmt::format(" {} at rho={:.2f};", name, pts[j].first);
  }
  // Ordered pointwise: higher uplink SNR gives a lower objective.
  std::vector<std::pair<double, std::string>> order;
  for (const double v : c.series_values) order.push_back({v, fmt::format("snr_ul_db={:g}", v)});
  std::sort(order.begin(), order.end());
  int unordered = 0;
  for (std::size_t s = 1; s < order.size(); ++s) {
    const auto& lo = obj.at(order[s - 1].second);
    const auto& hi = obj.at(order[s].second);
    for (std::size_t i = 0; i < lo.size(); ++i) unordered += !(hi[i].second < lo[i].second);
  }
  return {interior && unordered == 0 && obj.size() == 3,
          fmt::format("100 draws; minima:{} {} unordered grid points", minima, unordered)};
}

Outcome fig4_trend() {
  SweepConfig c = preset_config("fig4");
  c.repetitions = 100;
  c.seed = 4;
  const auto curve = means(run_sweep(c), "rho_opt").begin()->second;
  bool ok = curve.size() == 6;
  std::string values;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i > 0) ok = ok && curve[i].second <= curve[i - 1].second;
    values += fmt::format(" {:.4f}", curve[i].second);
  }
  return {ok, "mean rho_opt over uplink SNR 0..10 dB:" + values};
}

Outcome fig5_trend() {
  SweepConfig c = preset_config("fig5");
  c.repetitions = 100;
  c.seed = 5;
  const SweepTable t = run_sweep(c);
  const MeanCurve sp = means(t, "sum_power");
  const auto& opt = sp.at("optimal");
  const auto& fixed = sp.at(fmt::format("fixed_rho={:g}", c.fixed_rho));
  bool decreasing = true;
  for (std::size_t i = 1; i < opt.size(); ++i)
    decreasing = decreasing && opt[i].second < opt[i - 1].second;
  int above = 0;
  for (std::size_t i = 0; i < opt.size(); ++i)
    above += !(opt[i].second <= fixed[i].second * (1.0 + 1e-9));
  return {decreasing && above == 0,
          fmt::format("mean sum power {:.4g} -> {:.4g} W over 0..10 dB, strictly decreasing: {}; "
                      "optimal above fixed at {} points",
                      opt.front().second, opt.back().second, decreasing ? "yes" : "no", above)};
}

Outcome fig7_trend() {
  SweepConfig c = preset_config("fig7");
  c.jobs = 4;
  const SweepTable t = run_sweep(c);
  const std::size_t life = metric_index(t, "lifetime");
  const std::size_t capped = metric_index(t, "capped");
  // series -> (x, rep) -> lifetime
  std::map<double, std::map<std::pair<double, int>, double>> by_eps;
  int not_capped = 0;
  for (const SweepRow& r : t.rows) {
    const double eps = std::stod(r.series.substr(r.series.find('=') + 1));
    by_eps[eps][{r.x, r.rep}] = r.metrics[life];
    if (eps == 0.01 && r.metrics[capped] != 1.0) ++not_capped;
  }
  int increases = 0, pairs = 0;
  for (auto it = std::next(by_eps.begin()); it != by_eps.end(); ++it)
    for (const auto& [key, v] : it->second) {
      ++pairs;
      increases += v > std::prev(it)->second.at(key);
    }
  // Constant channel, epsilon = 1: floor(P_bat / per-slot need).
  ScenarioSpec spec = c.base;
  spec.num_users = 1;
  spec.distances = Vector{0.6};
  const std::uint64_t seed = 17;
  const SystemScenario s = generate(spec, derive_seed(seed, 0));
  const double need =
      solve_uplink(s.channels.uplink_gain[0], s.noise.sigma_ul[0], s.bandwidth, s.rates.r_ul[0])
          .total() + s.p0 + s.p0_prime;
  spec.battery_w = 123.4 * need;
  LifetimeOptions opt;
  opt.constant_channel = true;
  opt.grid_step = c.grid_step;
  opt.cap = 100000;
  const long got = simulate_lifetime(spec, 1.0, seed, opt).lifetime;
  const long expected = static_cast<long>(std::floor(spec.battery_w / need));
  return {increases == 0 && not_capped == 0 && got == expected,
          fmt::format("{} common-seed pairs, {} increases; eps=0.01 runs below the cap: {}; "
                      "eps=1 constant channel lifetime {} vs floor {}",
                      pairs, increases, not_capped, got, expected)};
}

Outcome fig8_ordering() {
  SweepConfig c = preset_config("fig8");
  c.jobs = 4;
  const SweepTable t = run_sweep(c);
  const std::size_t bs = metric_index(t, "bs_power");
  std::map<std::tuple<std::string, double, int>, double> ded, hyb;
  for (const SweepRow& r : t.rows) {
    const auto cut = r.series.rfind(' ');
    auto& dst = r.series.substr(cut + 1) == "dedicated" ? ded : hyb;
    dst[{r.series.substr(0, cut), r.x, r.rep}] = r.metrics[bs];
  }
  int total = 0, worse = 0, strict = 0;
  for (const auto& [key, d] : ded) {
    const double h = hyb.at(key);
    ++total;
    worse += h > d * (1.0 + 1e-9);
    strict += h < d * (1.0 - 1e-9);
  }
  const double frac = total ? static_cast<double>(strict) / total : 0.0;
  return {total >= 50 && worse == 0 && frac >= 0.9,
          fmt::format("{} instances (K=2,4 x 6 SNRs x {} draws); hybrid above dedicated {}; "
                      "strictly below {:.1f}%",
                      total, c.repetitions, worse, 100.0 * frac)};
}

// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const std::string& exe, const std::filesystem::path& scratch,
                    const std::filesystem::path& configs) {
  std::filesystem::create_directories(scratch);
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"solve", "solve --config " + (configs / "k2_n2.json").string() + " --mode hybrid"},
      {"sweep", "sweep --preset fig5 --reps 10 --jobs 2"},
      {"lifetime", "lifetime --config " + (configs / "lifetime.json").string() + " --cap 200 --trace"},
      {"oracle", "oracle-check --config " + (configs / "k1_n2.json").string()},
  };
  std::string detail;
  bool ok = true;
  for (const auto& [name, args] : cases) {
    std::string blobs[2];
    for (int i = 0; i < 2; ++i) {
      const auto out = scratch / (name + std::to_string(i));
      const std::string cmd = exe + " " + args + " --seed 42 --out " + out.string();
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
      blobs[i] = slurp(out);
    }
    const bool same = !blobs[0].empty() && blobs[0] == blobs[1];
    ok = ok && same;
    detail += fmt::format(" {} {} bytes {};", name, blobs[0].size(), same ? "identical" : "DIFFER");
  }
  return {ok, "CLI reruns with --seed 42:" + detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 4) {
    fmt::print(stderr, "usage: acceptance <swipt executable> <configs dir> <scratch dir>\n");
    return 2;
  }
  criterion("KKT suite", kkt_suite, 60.0);
  criterion("Oracle equivalence", oracle_equivalence, 300.0);
  criterion("Jacobian check", jacobian_check);
  criterion("Newton accuracy", newton_accuracy);
  criterion("f monotonicity", f_monotonicity);
  criterion("Fig. 3 shape", fig3_shape);
  criterion("Fig. 4 trend", fig4_trend);
  criterion("Fig. 5 trend", fig5_trend);
  criterion("Fig. 7 trend", fig7_trend);
  criterion("Fig. 8 ordering", fig8_ordering);
  criterion("Determinism", [&] { return determinism(argv[1], argv[3], argv[2]); });
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

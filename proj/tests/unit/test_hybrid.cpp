#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "random_instances.hpp"
#include "swipt/downlink_dedicated.hpp"
#include "swipt/downlink_hybrid.hpp"
#include "swipt/error.hpp"
#include "swipt/uplink.hpp"

using namespace swipt;

namespace {

HybridProblem symmetric_pair(double p_th) {
  HybridProblem p;
  p.num_users = 2;
  p.subcarriers = 2;
  p.alpha_tilde = {{1.0, 0.9}, {1.0, 0.9}};
  p.gamma = {{2.0, 1.0}, {2.0, 1.0}};
  p.cross = {{{1.0, 0.3}, {0.5, 0.2}}, {{0.3, 1.0}, {0.2, 0.5}}};
  p.bits = {1.5, 1.5};
  p.p_th = {p_th, p_th};
  return p;
}

// K = 1 hybrid problem built from a dedicated one.
HybridProblem lift(const DedicatedProblem& d) {
  HybridProblem h;
  h.num_users = 1;
  h.subcarriers = static_cast<int>(d.gains.size());
  h.alpha_tilde = {d.alpha_tilde};
  h.gamma.assign(1, Vector(d.gains.size()));
  h.cross.assign(1, Matrix(d.gains.size(), Vector(1)));
  for (std::size_t i = 0; i < d.gains.size(); ++i) {
    h.gamma[0][i] = d.quality(static_cast<int>(i));
    h.cross[0][i][0] = d.gains[i];
  }
  h.bits = {d.r_dl / d.bandwidth};
  h.p_th = {d.p_th};
  return h;
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
  p.r_dl = 0.2 + 5.0 * u(rng);
  p.p_th = 12.0 * u(rng);
  return p;
}

std::vector<IndexSet> full_sets(const HybridProblem& p) {
  std::vector<IndexSet> s(p.num_users);
  for (int l = 0; l < p.num_users; ++l)
    for (int i = 0; i < p.subcarriers; ++i) s[l].push_back(i);
  return s;
}

// Largest psi scale keeping every weight positive along the direction d.
double admissible_scale(const HybridProblem& p, const Vector& d) {
  double t = 1e300;
  for (int l = 0; l < p.num_users; ++l)
    for (int i = 0; i < p.subcarriers; ++i) {
      double h = 0.0;
      for (int k = 0; k < p.num_users; ++k) h += d[k] * p.cross[l][i][k];
      if (h > 0.0) t = std::min(t, p.alpha_tilde[l][i] / h);
    }
  return t;
}

Vector harvest(const HybridProblem& p, const Matrix& x) {
  Vector h(p.num_users, 0.0);
  for (int l = 0; l < p.num_users; ++l)
    for (int i = 0; i < p.subcarriers; ++i)
      for (int k = 0; k < p.num_users; ++k) h[k] += x[l][i] * p.cross[l][i][k];
  return h;
}

}  // namespace

TEST_CASE("hybrid alpha tilde") {
  CostParameters c = CostParameters::from_kappa(1.0, 0.0, 0.0, 2);
  Tensor3 cross(2, Matrix(1, Vector(2, 1.0)));
  const Matrix a = hybrid_alpha_tilde(c, 0.8, Vector{0.5, 0.5}, cross);
  CHECK(a[0][0] == 1.0);
  c.beta = {0.1, 0.1};
  const Matrix b = hybrid_alpha_tilde(c, 0.8, Vector{0.5, 0.5}, cross);
  CHECK(b[0][0] == doctest::Approx(0.92));
  CHECK(b[1][0] == doctest::Approx(0.92));
  c.beta = {3.0, 3.0};
  CHECK_THROWS_AS(hybrid_alpha_tilde(c, 0.8, Vector{0.5, 0.5}, cross), SolverError);

  CostParameters one = CostParameters::from_kappa(1.0, 0.0, 0.2, 1);
  const Tensor3 c1{{{0.7}, {1.9}}};
  const Matrix h = hybrid_alpha_tilde(one, 0.8, Vector{0.6}, c1);
  const Vector d = dedicated_alpha_tilde(1.0, 0.2, 0.8, 0.6, Vector{0.7, 1.9});
  CHECK(h[0][0] == doctest::Approx(d[0]));
  CHECK(h[0][1] == doctest::Approx(d[1]));
}

TEST_CASE("f_vec reduces to the dedicated f with one user") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 30; ++t) {
    DedicatedProblem d = random_dedicated(rng, 1 + t % 5);
    HybridProblem h = lift(d);
    IndexSet set;
    for (int i = 0; i < h.subcarriers; ++i) set.push_back(i);
    double phi = 1e300;
    for (std::size_t i = 0; i < d.gains.size(); ++i) phi = std::min(phi, d.alpha_tilde[i] / d.gains[i]);
    const double x = 0.7 * phi * (t % 4) / 3.0;
    const Vector f = evaluate_f_vec(Vector{x}, h, {set});
    CHECK(f[0] == doctest::Approx(evaluate_f(x, d, set)).epsilon(1e-12));
  }
}

TEST_CASE("f_vec symmetry and high-precision agreement") {
  const HybridProblem p = symmetric_pair(2.0);
  for (double s : {0.0, 0.1, 0.3, 0.5}) {
    const Vector f = evaluate_f_vec(Vector{s, s}, p, full_sets(p));
    CHECK(f[0] == doctest::Approx(f[1]).epsilon(1e-13));
  }

  std::mt19937_64 rng(43);
  for (int t = 0; t < 20; ++t) {
    HybridProblem q = testgen::hybrid_problem(rng, 2, 2);
    Vector psi{0.1, 0.2};
    const double tmax = admissible_scale(q, psi);
    if (tmax <= 1.0) for (double& v : psi) v *= 0.5 * tmax;
    const auto sets = full_sets(q);
    const Vector f = evaluate_f_vec(psi, q, sets);
    const Vector ref = oracle_ref::f_hybrid_hp(psi, q.alpha_tilde, q.gamma, q.cross, q.bits, q.p_th, sets);
    const Vector scale = residual_scale(q);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(f[k] - ref[k]) <= 1e-12 * (scale[k] + std::abs(ref[k])));
  }
}

TEST_CASE("f_vec reports the offending pole") {
  HybridProblem p = symmetric_pair(1.0);
  // w[0][0] = 1 - psi_0 * 1 - psi_1 * 0.3 = 0
  CHECK_THROWS_AS(evaluate_f_vec(Vector{0.7, 1.0}, p, full_sets(p)), SolverError);
}

TEST_CASE("analytic Jacobian matches central differences") {
  // Differences of a 50-digit evaluation of f, so rounding does not mask the comparison.
  std::mt19937_64 rng(47);
  int points = 0;
  for (int t = 0; t < 60; ++t) {
    const int K = 1 + t % 4;
    const int N = 2 + (t / 4) % 4;
    HybridProblem p = testgen::hybrid_problem(rng, K, N);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector dir(K);
    for (double& v : dir) v = u(rng);
    const double tmax = admissible_scale(p, dir);
    Vector psi(K);
    for (int k = 0; k < K; ++k) psi[k] = dir[k] * tmax * 0.6 * u(rng);
    const auto sets = price_allocation(p, psi).active;
    const Matrix J = jacobian(psi, p, sets);
    const Vector scale = residual_scale(p);
    for (int j = 0; j < K; ++j) {
      const double h = 1e-6;
      Vector a = psi, b = psi;
      a[j] += h;
      b[j] -= h;
      const Vector fa = oracle_ref::f_hybrid_hp(a, p.alpha_tilde, p.gamma, p.cross, p.bits, p.p_th, sets);
      const Vector fb = oracle_ref::f_hybrid_hp(b, p.alpha_tilde, p.gamma, p.cross, p.bits, p.p_th, sets);
      for (int k = 0; k < K; ++k) {
        const double fd = (fa[k] - fb[k]) / (2 * h);
        CHECK(std::abs(J[k][j] - fd) <= 1e-4 * std::abs(fd) + 1e-9 * scale[k]);
      }
    }
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < K; ++j)
        CHECK(J[k][j] == doctest::Approx(J[j][k]).epsilon(1e-10));
    ++points;
  }
  CHECK(points >= 50);
}

TEST_CASE("one-user Jacobian is the derivative of the dedicated f") {
  std::mt19937_64 rng(53);
  DedicatedProblem d = random_dedicated(rng, 3);
  HybridProblem h = lift(d);
  const IndexSet set{0, 1, 2};
  double phi = 1e300;
  for (std::size_t i = 0; i < 3; ++i) phi = std::min(phi, d.alpha_tilde[i] / d.gains[i]);
  const double x = 0.4 * phi;
  const double fd = oracle_ref::central_diff([&](double y) { return evaluate_f(y, d, set); }, x, 1e-6);
  CHECK(jacobian(Vector{x}, h, {set})[0][0] == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("symmetric pair Jacobian is invariant under swapping users") {
  const HybridProblem p = symmetric_pair(1.0);
  const Matrix J = jacobian(Vector{0.2, 0.2}, p, full_sets(p));
  CHECK(J[0][0] == doctest::Approx(J[1][1]));
  CHECK(J[0][1] == doctest::Approx(J[1][0]));
}

TEST_CASE("newton_solve") {
  // Nothing to harvest.
  HybridProblem slack = symmetric_pair(-1.0);
  auto z = newton_solve(slack, Vector{0.0, 0.0});
  CHECK(z.psi == Vector{0.0, 0.0});
  CHECK(z.iterations == 0);

  // The symmetric fixed point stays symmetric.
  const HybridProblem base = symmetric_pair(0.0);
  const Vector h0 = harvest(base, price_allocation(base, Vector{0.0, 0.0}).p);
  HybridProblem p = symmetric_pair(1.1 * h0[0]);
  auto r = newton_solve(p, Vector{0.0, 0.0});
  CHECK(r.psi[0] > 0.0);
  CHECK(r.psi[0] == doctest::Approx(r.psi[1]).epsilon(1e-8));
  CHECK(r.residual <= 1e-5);

  // One user: the same multiplier as the scalar bisection.
  std::mt19937_64 rng(59);
  int compared = 0;
  for (int t = 0; t < 100 && compared < 25; ++t) {
    DedicatedProblem d = random_dedicated(rng, 1 + t % 5);
    auto ds = solve_downlink_dedicated(d);
    if (ds.harvest_corner || ds.psi == 0.0) continue;
    auto nr = newton_solve(lift(d), Vector{0.0}, NewtonOptions{1e-12, 100, 30});
    CHECK(nr.psi[0] == doctest::Approx(ds.psi).epsilon(1e-6));
    ++compared;
  }
  CHECK(compared >= 10);
}

TEST_CASE("one-user hybrid solve equals the dedicated solve") {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 60; ++t) {
    SystemScenario s = testgen::scenario(rng, 1, 1 + t % 5);
    const double rho = 0.2 + 0.6 * (t % 7) / 6.0;
    const auto up = solve_uplink(s.channels.uplink_gain[0], s.noise.sigma_ul[0], s.bandwidth,
                                 s.rates.r_ul[0]);
    DedicatedProblem d = make_dedicated_problem(s, 0, rho, up.total(), 0.0);
    HybridProblem h = make_hybrid_problem(s, Vector{rho}, Vector{up.total()}, Vector{0.0});
    CHECK(h.p_th[0] == doctest::Approx(d.p_th));
    auto ds = solve_downlink_dedicated(d);
    auto hs = solve_downlink_hybrid(h);
    double total = 0.0;
    for (double v : ds.p_dl) total += v;
    for (int i = 0; i < s.subcarriers; ++i)
      CHECK(std::abs(hs.p_dl[0][i] - ds.p_dl[i]) <= 1e-6 * std::max(total, 1e-12));
  }
}

TEST_CASE("hybrid with slack harvest is per-user water-filling") {
  std::mt19937_64 rng(67);
  SystemScenario s = testgen::scenario(rng, 3, 4);
  s.costs.beta = {0.0, 0.0, 0.0};
  s.battery = {100.0, 100.0, 100.0};
  const Vector rho{0.5, 0.5, 0.5};
  HybridProblem h = make_hybrid_problem(s, rho, Vector{0.1, 0.1, 0.1}, s.battery);
  auto hs = solve_downlink_hybrid(h);
  CHECK(hs.psi == Vector{0.0, 0.0, 0.0});
  for (int k = 0; k < 3; ++k) {
    DedicatedProblem d = make_dedicated_problem(s, k, 0.5, 0.1, 100.0);
    auto ds = solve_downlink_dedicated(d);
    for (int i = 0; i < 4; ++i) CHECK(hs.p_dl[k][i] == doctest::Approx(ds.p_dl[i]).epsilon(1e-12));
  }
}

TEST_CASE("hybrid KKT conditions on random instances") {
  std::mt19937_64 rng(71);
  int barrier = 0;
  for (int t = 0; t < 200; ++t) {
    const int K = 1 + t % 4;
    const int N = 1 + (t / 4) % 6;
    SystemScenario s = testgen::scenario(rng, K, N);
    Vector rho(K), up(K), bat(K, 0.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < K; ++k) {
      rho[k] = 0.1 + 0.8 * u(rng);
      up[k] = solve_uplink(s.channels.uplink_gain[k], s.noise.sigma_ul[k], 1.0, s.rates.r_ul[k]).total();
    }
    HybridProblem h = make_hybrid_problem(s, rho, up, bat);
    HybridDownlinkSolution hs = solve_downlink_hybrid(h);
    barrier += hs.used_barrier;
    const Vector got = harvest(h, hs.p_dl);
    const Vector sc = residual_scale(h);
    for (int k = 0; k < K; ++k) {
      const double rate = downlink_rate(hs.p_dl[k], rho[k], s.channels.downlink_gain[k],
                                        s.noise.sigma_dl[k], 1.0);
      CHECK(rate >= s.rates.r_dl[k] * (1 - 1e-6));
      if (hs.lambda[k] > 0.0 && !hs.used_barrier)
        CHECK(rate == doctest::Approx(s.rates.r_dl[k]).epsilon(1e-6));
      CHECK(hs.psi[k] >= 0.0);
      CHECK(got[k] >= h.p_th[k] - 1e-6 * sc[k]);
      CHECK(std::abs(hs.psi[k] * (got[k] - h.p_th[k])) <= 1e-6 * std::max(1.0, h.p_th[k]));
      for (int i = 0; i < N; ++i) CHECK(hs.p_dl[k][i] >= 0.0);
    }
    CHECK(hybrid_stationarity_residual(h, hs) <= 1e-6);

  }
  MESSAGE("barrier path used on " << barrier << " of 200 instances");
}

TEST_CASE("hybrid BS power never exceeds dedicated BS power") {
  std::mt19937_64 rng(73);
  for (int t = 0; t < 100; ++t) {
    const int K = 1 + t % 3;
    const int N = 1 + (t / 3) % 4;
    SystemScenario s = testgen::scenario(rng, K, N);
    s.costs.beta.assign(K, 0.0);
    Vector rho(K, 0.5), up(K), bat(K, 0.0);
    for (int k = 0; k < K; ++k)
      up[k] = solve_uplink(s.channels.uplink_gain[k], s.noise.sigma_dl[k], 1.0, s.rates.r_ul[k]).total();
    HybridProblem h = make_hybrid_problem(s, rho, up, bat);
    auto hs = solve_downlink_hybrid(h);
    double hybrid_total = 0.0, dedicated_total = 0.0;
    for (const auto& row : hs.p_dl)
      for (double v : row) hybrid_total += v;
    for (int k = 0; k < K; ++k) {
      auto ds = solve_downlink_dedicated(make_dedicated_problem(s, k, 0.5, up[k], 0.0));
      for (double v : ds.p_dl) dedicated_total += v;
    }
    CHECK(hybrid_total <= dedicated_total * (1 + 1e-9) + 1e-9);
  }
}

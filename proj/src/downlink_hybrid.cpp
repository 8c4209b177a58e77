#include "swipt/downlink_hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "dense_lu.hpp"
#include "swipt/error.hpp"
#include "swipt/uplink.hpp"

namespace swipt {

Matrix hybrid_alpha_tilde(const CostParameters& costs, double eta, std::span<const double> rho,
                          const Tensor3& cross) {
  const std::size_t K = cross.size();
  require(rho.size() == K && costs.beta.size() == K, "hybrid_alpha_tilde: size mismatch");
  Matrix out(K);
  for (std::size_t l = 0; l < K; ++l) {
    out[l].resize(cross[l].size());
    for (std::size_t i = 0; i < cross[l].size(); ++i) {
      double a = costs.alpha;
      for (std::size_t k = 0; k < K; ++k) a -= costs.beta[k] * eta * rho[k] * cross[l][i][k];
      if (!(a > 0.0))
        fail(ErrorKind::Infeasible, "kappa bound violated: alpha_tilde <= 0 at user " +
                                        std::to_string(l) + " subcarrier " + std::to_string(i));
      out[l][i] = a;
    }
  }
  return out;
}

HybridProblem make_hybrid_problem(const SystemScenario& s, std::span<const double> rho,
                                  std::span<const double> uplink_totals,
                                  std::span<const double> batteries) {
  validate(s, /*need_cross=*/true);
  const int K = s.num_users;
  const int N = s.subcarriers;
  require(static_cast<int>(rho.size()) == K && static_cast<int>(uplink_totals.size()) == K &&
              static_cast<int>(batteries.size()) == K,
          "make_hybrid_problem: expected one entry per user");
  HybridProblem prob;
  prob.num_users = K;
  prob.subcarriers = N;
  prob.cross = s.channels.cross_gain;
  prob.alpha_tilde = hybrid_alpha_tilde(s.costs, s.eta, rho, prob.cross);
  prob.gamma.assign(K, Vector(N, 0.0));
  prob.bits.resize(K);
  prob.p_th.resize(K);
  double sigma_sum = 0.0;
  for (int l = 0; l < K; ++l)
    for (int i = 0; i < N; ++i) sigma_sum += s.noise.sigma_ul[l][i];
  for (int l = 0; l < K; ++l) {
    require(rho[l] >= 0.0 && rho[l] < 1.0, "hybrid: rho must lie in [0,1)");
    for (int i = 0; i < N; ++i)
      prob.gamma[l][i] = (1.0 - rho[l]) * s.channels.downlink_gain[l][i] / s.noise.sigma_dl[l][i];
    prob.bits[l] = s.rates.r_dl[l] / s.bandwidth;
    const double need = uplink_totals[l] + s.p0 + s.p0_prime - batteries[l];
    if (rho[l] == 0.0) {
      if (need > 0.0)
        fail(ErrorKind::Infeasible, "hybrid: positive harvest requirement with rho = 0");
      prob.p_th[l] = -sigma_sum;
    } else {
      prob.p_th[l] = need / (s.eta * rho[l]) - sigma_sum;
    }
  }
  return prob;
}

namespace {

void check_problem(const HybridProblem& p) {
  const auto K = static_cast<std::size_t>(p.num_users);
  const auto N = static_cast<std::size_t>(p.subcarriers);
  require(K >= 1 && N >= 1, "hybrid: empty problem");
  require(p.alpha_tilde.size() == K && p.gamma.size() == K && p.cross.size() == K &&
              p.bits.size() == K && p.p_th.size() == K,
          "hybrid: dimension mismatch");
  for (std::size_t l = 0; l < K; ++l) {
    require(p.alpha_tilde[l].size() == N && p.gamma[l].size() == N && p.cross[l].size() == N,
            "hybrid: dimension mismatch");
    for (std::size_t i = 0; i < N; ++i) {
      require(p.cross[l][i].size() == K, "hybrid: cross gain dimension mismatch");
      if (p.gamma[l][i] > 0.0 && !(p.alpha_tilde[l][i] > 0.0))
        fail(ErrorKind::Infeasible, "kappa bound violated: alpha_tilde <= 0");
    }
  }
}

bool usable(const HybridProblem& p, int l, int i) { return p.gamma[l][i] > 0.0; }

bool admissible(const HybridProblem& prob, std::span<const double> psi) {
  const Matrix w = hybrid_weights(prob, psi);
  for (int l = 0; l < prob.num_users; ++l)
    for (int i = 0; i < prob.subcarriers; ++i)
      if (usable(prob, l, i) && !(w[l][i] > 0.0)) return false;
  return true;
}

Vector harvest(const HybridProblem& prob, const Matrix& p) {
  Vector h(prob.num_users, 0.0);
  for (int l = 0; l < prob.num_users; ++l)
    for (int i = 0; i < prob.subcarriers; ++i)
      if (p[l][i] != 0.0)
        for (int k = 0; k < prob.num_users; ++k) h[k] += p[l][i] * prob.cross[l][i][k];
  return h;
}

// f at psi using the active sets the water-filling itself selects; identical
// to evaluate_f_vec on those sets.
Vector f_at(const HybridProblem& prob, std::span<const double> psi, HybridPricing* out = nullptr) {
  HybridPricing pr = price_allocation(prob, psi);
  Vector f = harvest(prob, pr.p);
  for (int k = 0; k < prob.num_users; ++k) f[k] -= prob.p_th[k];
  if (out) *out = std::move(pr);
  return f;
}

// Lagrangian dual sum_{l,i} w P + psi' p_th at the water-filling prices.
double dual_value(const HybridProblem& prob, std::span<const double> psi, const HybridPricing& pr) {
  double d = 0.0;
  for (int l = 0; l < prob.num_users; ++l)
    for (int i = 0; i < prob.subcarriers; ++i) d += pr.weights[l][i] * pr.p[l][i];
  for (int k = 0; k < prob.num_users; ++k) d += psi[k] * prob.p_th[k];
  return d;
}

Matrix restrict(const Matrix& m, const std::vector<int>& idx) {
  Matrix r(idx.size(), Vector(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) r[a][b] = m[idx[a]][idx[b]];
  return r;
}

double scaled_norm(const Vector& f, const Vector& scale, const std::vector<int>& idx) {
  double worst = 0.0;
  for (int k : idx) worst = std::max(worst, std::abs(f[k]) / scale[k]);
  return worst;
}

double merit(const Vector& f, const Vector& scale, const std::vector<int>& idx) {
  double s = 0.0;
  for (int k : idx) s += (f[k] / scale[k]) * (f[k] / scale[k]);
  return s;
}

// Primal log-barrier path for instances where f has no zero: the harvest
// requirement forces so much power onto the cheapest subcarriers that some
// rate constraint goes slack. Works in scaled units (powers, costs and gains
// of order one) and recovers the multipliers from the barrier terms.
HybridDownlinkSolution solve_interior_point(const HybridProblem& prob, int newton_budget) {
  const int K = prob.num_users;
  const int N = prob.subcarriers;
  std::vector<std::pair<int, int>> vars;  // (user, subcarrier) of every usable entry
  for (int l = 0; l < K; ++l)
    for (int i = 0; i < N; ++i)
      if (usable(prob, l, i)) vars.emplace_back(l, i);
  const int n = static_cast<int>(vars.size());
  std::vector<int> rate_rows, harvest_rows;
  for (int l = 0; l < K; ++l)
    if (prob.bits[l] > 0.0) rate_rows.push_back(l);
  for (int k = 0; k < K; ++k)
    if (prob.p_th[k] > 0.0) harvest_rows.push_back(k);

  // Scales: power unit from the rate targets, cost unit from alpha_tilde,
  // harvest unit from the gains.
  double s0 = 0.0, c_scale = 0.0, h_scale = 0.0;
  for (auto [l, i] : vars) {
    s0 = std::max(s0, 1.0 / prob.gamma[l][i]);
    c_scale = std::max(c_scale, prob.alpha_tilde[l][i]);
    for (int k = 0; k < K; ++k) h_scale = std::max(h_scale, prob.cross[l][i][k]);
  }
  for (int k : harvest_rows) s0 = std::max(s0, prob.p_th[k] / (h_scale * n));
  Eigen::VectorXd c(n), q(n);
  Eigen::MatrixXd h(K, n);
  for (int j = 0; j < n; ++j) {
    const auto [l, i] = vars[j];
    c[j] = prob.alpha_tilde[l][i] / c_scale;
    q[j] = prob.gamma[l][i] * s0;
    for (int k = 0; k < K; ++k) h(k, j) = prob.cross[l][i][k] / h_scale;
  }
  Eigen::VectorXd need = Eigen::VectorXd::Zero(K);
  for (int k : harvest_rows) need[k] = prob.p_th[k] / (s0 * h_scale);

  auto rate_slack = [&](const Eigen::VectorXd& x, int l) {
    double r = -prob.bits[l];
    for (int j = 0; j < n; ++j)
      if (vars[j].first == l) r += std::log1p(q[j] * x[j]) / std::numbers::ln2;
    return r;
  };
  auto harvest_slack = [&](const Eigen::VectorXd& x, int k) { return h.row(k).dot(x) - need[k]; };
  auto strictly_feasible = [&](const Eigen::VectorXd& x) {
    for (int j = 0; j < n; ++j)
      if (!(x[j] > 0.0)) return false;
    for (int l : rate_rows)
      if (!(rate_slack(x, l) > 0.0)) return false;
    for (int k : harvest_rows)
      if (!(harvest_slack(x, k) > 0.0)) return false;
    return true;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  for (int it = 0; !strictly_feasible(x); ++it) {
    if (it > 200) fail(ErrorKind::Infeasible, "hybrid: no strictly feasible allocation found");
    x *= 2.0;
  }
  x *= 2.0;

  const double m = static_cast<double>(n + rate_rows.size() + harvest_rows.size());
  auto barrier = [&](const Eigen::VectorXd& v, double t) {
    double phi = t * c.dot(v);
    for (int j = 0; j < n; ++j) phi -= std::log(v[j]);
    for (int l : rate_rows) phi -= std::log(rate_slack(v, l));
    for (int k : harvest_rows) phi -= std::log(harvest_slack(v, k));
    return phi;
  };

  double t = m / c.dot(x);
  int steps = 0;
  for (;;) {
    for (int inner = 0; inner < 100; ++inner) {
      Eigen::VectorXd grad = t * c;
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
      for (int j = 0; j < n; ++j) {
        grad[j] -= 1.0 / x[j];
        H(j, j) += 1.0 / (x[j] * x[j]);
      }
      for (int l : rate_rows) {
        const double g = rate_slack(x, l);
        Eigen::VectorXd dg = Eigen::VectorXd::Zero(n);
        for (int j = 0; j < n; ++j) {
          if (vars[j].first != l) continue;
          const double den = 1.0 + q[j] * x[j];
          dg[j] = q[j] / (den * std::numbers::ln2);
          H(j, j) += q[j] * q[j] / (den * den * std::numbers::ln2 * g);
        }
        grad -= dg / g;
        H += dg * dg.transpose() / (g * g);
      }
      for (int k : harvest_rows) {
        const double a = harvest_slack(x, k);
        grad -= h.row(k).transpose() / a;
        H += h.row(k).transpose() * h.row(k) / (a * a);
      }
      const Eigen::VectorXd dx = -H.ldlt().solve(grad);
      const double decrement = -grad.dot(dx);
      if (!dx.allFinite())
        fail(ErrorKind::NonConvergence, "hybrid interior point: singular barrier Hessian");
      if (!(decrement > 1e-12)) break;  // centered, or rounding dominates the step
      if (++steps > newton_budget)
        fail(ErrorKind::NonConvergence, "hybrid interior point: Newton step budget exhausted");

      double step = 1.0;
      for (int j = 0; j < n; ++j)
        if (dx[j] < 0.0) step = std::min(step, -0.99 * x[j] / dx[j]);
      const double phi0 = barrier(x, t);
      bool moved = false;
      for (int b = 0; b < 60; ++b, step *= 0.5) {
        const Eigen::VectorXd cand = x + step * dx;
        if (!strictly_feasible(cand)) continue;
        if (barrier(cand, t) <= phi0 - 0.25 * step * decrement) {
          x = cand;
          moved = true;
          break;
        }
      }
      if (!moved) break;  // rounding floor for this t
    }
    if (m / t <= 1e-14 * c.dot(x)) break;
    t *= 20.0;
  }

  HybridDownlinkSolution sol;
  sol.p_dl.assign(K, Vector(N, 0.0));
  double total = 0.0;
  for (int j = 0; j < n; ++j) total += x[j];
  for (int j = 0; j < n; ++j) {
    // Entries the barrier only keeps off zero are set to zero.
    if (x[j] > 1e-10 * total) sol.p_dl[vars[j].first][vars[j].second] = x[j] * s0;
  }
  // Multipliers. Barrier estimates 1/(t * slack) lose their digits to
  // cancellation in the slack, so fit stationarity on the positive entries
  // instead, over the constraints that bind, keeping multipliers >= 0.
  std::vector<int> cols;  // 0..K-1 rate multipliers, K..2K-1 harvest multipliers
  for (int l : rate_rows)
    if (rate_slack(x, l) <= 1e-8 * std::max(1.0, prob.bits[l])) cols.push_back(l);
  for (int k : harvest_rows)
    if (harvest_slack(x, k) <= 1e-8 * std::max(1.0, need[k])) cols.push_back(K + k);
  std::vector<int> rows;
  for (int j = 0; j < n; ++j)
    if (sol.p_dl[vars[j].first][vars[j].second] > 0.0) rows.push_back(j);
  Vector z(2 * K, 0.0);
  while (!cols.empty() && !rows.empty()) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows.size(), cols.size());
    Eigen::VectorXd b(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto [l, i] = vars[rows[r]];
      const double at = prob.alpha_tilde[l][i];
      const double p = sol.p_dl[l][i];
      b[r] = 1.0;
      for (std::size_t cidx = 0; cidx < cols.size(); ++cidx) {
        const int col = cols[cidx];
        if (col < K) {
          if (col == l)
            A(r, cidx) = prob.gamma[l][i] / (1.0 + prob.gamma[l][i] * p) / at;
        } else {
          A(r, cidx) = prob.cross[l][i][col - K] / at;
        }
      }
    }
    const Eigen::VectorXd sol_z = A.colPivHouseholderQr().solve(b);
    int worst = -1;
    for (std::size_t cidx = 0; cidx < cols.size(); ++cidx)
      if (sol_z[cidx] < 0.0 && (worst < 0 || sol_z[cidx] < sol_z[worst])) worst = static_cast<int>(cidx);
    if (worst < 0) {
      for (std::size_t cidx = 0; cidx < cols.size(); ++cidx) z[cols[cidx]] = sol_z[cidx];
      break;
    }
    cols.erase(cols.begin() + worst);
  }
  sol.lambda.assign(z.begin(), z.begin() + K);
  sol.psi.assign(z.begin() + K, z.end());
  sol.active_sets.resize(K);
  for (int l = 0; l < K; ++l)
    for (int i = 0; i < N; ++i)
      if (sol.p_dl[l][i] > 0.0) sol.active_sets[l].push_back(i);
  sol.p_th = prob.p_th;
  sol.newton_iterations = steps;
  const Vector got = harvest(prob, sol.p_dl);
  const Vector sc = residual_scale(prob);
  double worst = 0.0;
  for (int k : harvest_rows)
    worst = std::max(worst, std::abs(sol.psi[k] * (got[k] - prob.p_th[k])) / sc[k]);
  sol.residual_norm = worst;
  sol.used_barrier = true;
  return sol;
}

}  // namespace

Matrix hybrid_weights(const HybridProblem& prob, std::span<const double> psi) {
  require(static_cast<int>(psi.size()) == prob.num_users, "psi: expected one entry per user");
  Matrix w = prob.alpha_tilde;
  for (int l = 0; l < prob.num_users; ++l)
    for (int i = 0; i < prob.subcarriers; ++i)
      for (int m = 0; m < prob.num_users; ++m) w[l][i] -= psi[m] * prob.cross[l][i][m];
  return w;
}

HybridPricing price_allocation(const HybridProblem& prob, std::span<const double> psi) {
  HybridPricing out;
  out.weights = hybrid_weights(prob, psi);
  const int K = prob.num_users;
  out.p.resize(K);
  out.lambda.assign(K, 0.0);
  out.active.resize(K);
  for (int l = 0; l < K; ++l) {
    for (int i = 0; i < prob.subcarriers; ++i)
      if (usable(prob, l, i) && !(out.weights[l][i] > 0.0))
        fail(ErrorKind::Pole, "harvest prices leave the admissible region at user " +
                                  std::to_string(l) + " subcarrier " + std::to_string(i));
    WaterFilling wf = weighted_water_fill(out.weights[l], prob.gamma[l], prob.bits[l]);
    out.p[l] = std::move(wf.p);
    out.lambda[l] = wf.level;
    out.active[l] = std::move(wf.active);
  }
  return out;
}

namespace {

struct SetTerms {
  double lambda = 0.0;
  std::vector<double> inv_w;  // 1 / w over the set, same order as the set
};

SetTerms set_terms(const HybridProblem& prob, const Matrix& w, int l, const IndexSet& set) {
  SetTerms t;
  if (set.empty()) return t;
  double log_prod = 0.0;
  for (int i : set) {
    const double wi = w[l][i];
    if (wi == 0.0)
      fail(ErrorKind::Pole, "pole at user " + std::to_string(l) + " subcarrier " +
                                std::to_string(i));
    if (wi < 0.0)
      fail(ErrorKind::InvalidInput, "psi outside the admissible region at user " +
                                        std::to_string(l) + " subcarrier " + std::to_string(i));
    log_prod += std::log(prob.gamma[l][i] / wi);
    t.inv_w.push_back(1.0 / wi);
  }
  const double n = static_cast<double>(set.size());
  t.lambda = std::exp((prob.bits[l] * std::numbers::ln2 - log_prod) / n);
  return t;
}

}  // namespace

Vector evaluate_f_vec(std::span<const double> psi, const HybridProblem& prob,
                      const std::vector<IndexSet>& active_sets) {
  check_problem(prob);
  const int K = prob.num_users;
  require(static_cast<int>(active_sets.size()) == K, "evaluate_f_vec: one active set per user");
  const Matrix w = hybrid_weights(prob, psi);
  Vector f(K);
  for (int k = 0; k < K; ++k) f[k] = -prob.p_th[k];
  for (int l = 0; l < K; ++l) {
    const SetTerms t = set_terms(prob, w, l, active_sets[l]);
    for (std::size_t a = 0; a < active_sets[l].size(); ++a) {
      const int i = active_sets[l][a];
      for (int k = 0; k < K; ++k) {
        const double h = prob.cross[l][i][k];
        f[k] += t.lambda * h * t.inv_w[a] - h / prob.gamma[l][i];
      }
    }
  }
  return f;
}

Matrix jacobian(std::span<const double> psi, const HybridProblem& prob,
                const std::vector<IndexSet>& active_sets) {
  check_problem(prob);
  const int K = prob.num_users;
  require(static_cast<int>(active_sets.size()) == K, "jacobian: one active set per user");
  const Matrix w = hybrid_weights(prob, psi);
  Matrix J(K, Vector(K, 0.0));
  Vector zeta(K);
  Vector dlog_lambda(K);
  for (int l = 0; l < K; ++l) {
    const auto& set = active_sets[l];
    if (set.empty()) continue;
    const SetTerms t = set_terms(prob, w, l, set);
    const double n = static_cast<double>(set.size());
    std::fill(zeta.begin(), zeta.end(), 0.0);
    std::fill(dlog_lambda.begin(), dlog_lambda.end(), 0.0);
    for (std::size_t a = 0; a < set.size(); ++a) {
      const int i = set[a];
      for (int k = 0; k < K; ++k) {
        zeta[k] += prob.cross[l][i][k] * t.inv_w[a];
        dlog_lambda[k] -= prob.cross[l][i][k] * t.inv_w[a] / n;
      }
    }
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < K; ++j) {
        double dzeta = 0.0;
        for (std::size_t a = 0; a < set.size(); ++a) {
          const int i = set[a];
          dzeta += prob.cross[l][i][k] * prob.cross[l][i][j] * t.inv_w[a] * t.inv_w[a];
        }
        // d(lambda_l zeta_lk)/d psi_j = lambda_l' zeta_lk + lambda_l zeta_lk'
        J[k][j] += t.lambda * dlog_lambda[j] * zeta[k] + t.lambda * dzeta;
      }
    }
  }
  return J;
}

Vector residual_scale(const HybridProblem& prob) {
  const int K = prob.num_users;
  Vector s(K);
  for (int k = 0; k < K; ++k) {
    s[k] = std::abs(prob.p_th[k]);
    for (int l = 0; l < K; ++l)
      for (int i = 0; i < prob.subcarriers; ++i)
        if (usable(prob, l, i)) s[k] += prob.cross[l][i][k] / prob.gamma[l][i];
    s[k] = std::max(s[k], std::numeric_limits<double>::min());
  }
  return s;
}

NewtonResult newton_solve(const HybridProblem& prob, std::span<const double> psi0,
                          const NewtonOptions& opt) {
  check_problem(prob);
  const int K = prob.num_users;
  require(static_cast<int>(psi0.size()) == K, "newton_solve: psi0 needs one entry per user");
  NewtonResult res;
  res.psi.assign(psi0.begin(), psi0.end());
  for (double& v : res.psi) v = std::max(0.0, v);
  if (!admissible(prob, res.psi))
    fail(ErrorKind::InvalidInput, "newton_solve: initial psi outside the admissible region");
  const Vector scale = residual_scale(prob);

  HybridPricing pr;
  Vector f = f_at(prob, res.psi, &pr);
  res.frozen.assign(K, true);
  for (int k = 0; k < K; ++k)
    if (prob.p_th[k] > 0.0 && (res.psi[k] > 0.0 || f[k] < 0.0)) res.frozen[k] = false;

  // Distance to the nearest pole along the all-ones direction; the length
  // scale for steps taken without curvature information.
  double span = std::numeric_limits<double>::infinity();
  for (int l = 0; l < K; ++l)
    for (int i = 0; i < prob.subcarriers; ++i) {
      if (!usable(prob, l, i)) continue;
      double h = 0.0;
      for (int k = 0; k < K; ++k) h += prob.cross[l][i][k];
      if (h > 0.0) span = std::min(span, prob.alpha_tilde[l][i] / h);
    }
  if (!std::isfinite(span)) span = 1.0;

  auto free_set = [&] {
    std::vector<int> idx;
    for (int k = 0; k < K; ++k)
      if (!res.frozen[k]) idx.push_back(k);
    return idx;
  };

  for (int outer = 0; outer < 2 * K + 4; ++outer) {
    for (;;) {
      std::vector<int> idx = free_set();
      if (idx.empty() || scaled_norm(f, scale, idx) <= opt.tol) break;
      if (res.iterations >= opt.max_iterations)
        fail(ErrorKind::NonConvergence, "newton_solve: iteration limit reached");
      ++res.iterations;

      const Matrix J = restrict(jacobian(res.psi, prob, pr.active), idx);
      Vector rhs(idx.size());
      for (std::size_t a = 0; a < idx.size(); ++a) rhs[a] = -f[idx[a]];
      // A user whose set holds one subcarrier adds nothing to J, so J can be
      // singular or zero up to rounding. A small diagonal term on the natural
      // scale of f per unit price keeps the system definite; along flat
      // directions it gives a long ascent step that the line search trims.
      Matrix Jr = J;
      for (std::size_t a = 0; a < idx.size(); ++a) Jr[a][a] += 1e-8 * scale[idx[a]] / span;
      auto sol = detail::solve_dense(Jr, rhs);
      Vector d(idx.size());
      if (sol) {
        d = std::move(*sol);
      } else {
        for (std::size_t a = 0; a < idx.size(); ++a) d[a] = rhs[a] / scale[idx[a]] * span;
      }
      // Steps beyond the pole distance are shortened, keeping the direction.
      double longest = 0.0;
      for (double v : d) longest = std::max(longest, std::abs(v));
      if (!std::isfinite(longest)) {
        for (std::size_t a = 0; a < idx.size(); ++a) d[a] = rhs[a] / scale[idx[a]] * span;
      } else if (longest > 10.0 * span) {
        for (double& v : d) v *= 10.0 * span / longest;
      }

      // -f is the gradient of the concave dual, so the step must raise the
      // dual (Armijo) or, once the dual is flat to rounding, shrink the residual.
      const double m0 = merit(f, scale, idx);
      const double d0 = dual_value(prob, res.psi, pr);
      auto line_search = [&](const Vector& dir) {
        // Start inside the admissible region: weights are affine in psi, so
        // the first pole along dir is known in closed form.
        double t = 1.0;
        const Matrix w = hybrid_weights(prob, res.psi);
        for (int l = 0; l < K; ++l)
          for (int i = 0; i < prob.subcarriers; ++i) {
            if (!usable(prob, l, i)) continue;
            double rate = 0.0;
            for (std::size_t a = 0; a < idx.size(); ++a) rate += dir[a] * prob.cross[l][i][idx[a]];
            if (rate > 0.0) t = std::min(t, 0.9 * w[l][i] / rate);
          }
        for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
          Vector cand = res.psi;
          for (std::size_t a = 0; a < idx.size(); ++a)
            cand[idx[a]] = std::max(0.0, cand[idx[a]] + t * dir[a]);
          if (!admissible(prob, cand)) continue;
          HybridPricing pc;
          Vector fc = f_at(prob, cand, &pc);
          double slope = 0.0;
          for (int k = 0; k < K; ++k) slope -= f[k] * (cand[k] - res.psi[k]);
          const double dc = dual_value(prob, cand, pc);
          const double noise = 1e-13 * std::abs(d0);
          const bool armijo = dc >= d0 + 1e-4 * slope && dc > d0 - noise;
          const bool polish = dc >= d0 - noise && merit(fc, scale, idx) < m0;
          if (armijo || polish) {
            res.psi = std::move(cand);
            f = std::move(fc);
            pr = std::move(pc);
            return true;
          }
        }
        return false;
      };
      bool accepted = line_search(d);
      if (!accepted) {
        // Near a pole the regularized direction can point outward; the scaled
        // gradient is always an ascent direction.
        for (std::size_t a = 0; a < idx.size(); ++a) d[a] = rhs[a] / scale[idx[a]] * span;
        accepted = line_search(d);
      }
      if (!accepted) fail(ErrorKind::NonConvergence, "newton_solve: damped step failed");
      // A component pinned at zero whose constraint is slack leaves the system.
      for (int k : idx)
        if (res.psi[k] == 0.0 && f[k] >= 0.0) res.frozen[k] = true;
    }

    bool changed = false;
    for (int k = 0; k < K; ++k) {
      if (res.frozen[k] && prob.p_th[k] > 0.0 && f[k] < -opt.tol * scale[k]) {
        res.frozen[k] = false;
        changed = true;
      }
    }
    if (!changed) {
      res.residual = 0.0;
      for (int k = 0; k < K; ++k) {
        const double r = res.frozen[k] ? std::max(0.0, -f[k]) : std::abs(f[k]);
        res.residual = std::max(res.residual, r / scale[k]);
      }
      return res;
    }
  }
  fail(ErrorKind::NonConvergence, "newton_solve: active constraint set did not settle");
}

HybridDownlinkSolution solve_downlink_hybrid(const HybridProblem& prob, const HybridOptions& opt) {
  check_problem(prob);
  const int K = prob.num_users;
  try {
    NewtonOptions nopt;
    nopt.tol = opt.newton_tol;
    nopt.max_iterations = opt.max_iterations;
    const Vector zero(K, 0.0);
    NewtonResult nr = newton_solve(prob, zero, nopt);
    HybridPricing pr = price_allocation(prob, nr.psi);
    HybridDownlinkSolution sol;
    sol.p_dl = std::move(pr.p);
    sol.lambda = std::move(pr.lambda);
    sol.psi = nr.psi;
    sol.active_sets = std::move(pr.active);
    sol.p_th = prob.p_th;
    sol.newton_iterations = nr.iterations;
    sol.residual_norm = nr.residual;
    return sol;
  } catch (const SolverError& e) {
    if (!opt.allow_barrier || e.kind() == ErrorKind::Infeasible) throw;
  }
  return solve_interior_point(prob, 50 * opt.max_iterations);
}

double hybrid_stationarity_residual(const HybridProblem& prob, const HybridDownlinkSolution& sol) {
  const Matrix w = hybrid_weights(prob, sol.psi);
  double worst = 0.0;
  for (int l = 0; l < prob.num_users; ++l)
    for (int i = 0; i < prob.subcarriers; ++i) {
      if (!usable(prob, l, i)) continue;
      const double gamma = prob.gamma[l][i];
      const double grad = w[l][i] - sol.lambda[l] * gamma / (1.0 + gamma * sol.p_dl[l][i]);
      const double r = sol.p_dl[l][i] > 0.0 ? std::abs(grad) : std::max(0.0, -grad);
      worst = std::max(worst, r / prob.alpha_tilde[l][i]);
    }
  return worst;
}

}  // namespace swipt

#include "swipt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

#include "swipt/error.hpp"

namespace swipt {

namespace {

constexpr double kFeasTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool at_least(double lhs, double rhs) {
  return lhs >= rhs - kFeasTol * std::max(std::abs(rhs), std::abs(lhs));
}

// Smallest p >= 0 with log2(1 + q p) >= bits_left; inf when q = 0 and bits remain.
double rate_completion(double bits_left, double q) {
  if (bits_left <= 0.0) return 0.0;
  if (q <= 0.0) return kInf;
  return std::expm1(bits_left * std::numbers::ln2) / q;
}

// The scan grids every coordinate except one per user; `complete` fills the
// rest exactly (minimal feasible values) and returns the cost, or +inf.
struct Scan {
  int grid_dim = 0;
  int full_dim = 0;
  std::function<double(const Vector& grid, Vector& full)> complete;
};

long count_points(const std::vector<int>& n, long limit) {
  long total = 1;
  for (int v : n) {
    if (total > limit / std::max(v, 1)) return limit + 1;
    total *= v;
  }
  return total;
}

struct Best {
  double cost = kInf;
  Vector grid;
  Vector full;
};

// Odometer walk over lo[d] + j * step[d], j < n[d].
void walk(const Scan& scan, const Vector& lo, const Vector& step, const std::vector<int>& n,
          Best& best, long& evaluated) {
  const int D = scan.grid_dim;
  std::vector<int> idx(D, 0);
  Vector x(lo);
  Vector full(scan.full_dim);
  for (;;) {
    ++evaluated;
    const double c = scan.complete(x, full);
    if (c < best.cost) {
      best.cost = c;
      best.grid = x;
      best.full = full;
    }
    int d = 0;
    for (; d < D; ++d) {
      if (++idx[d] < n[d]) {
        x[d] = lo[d] + idx[d] * step[d];
        break;
      }
      idx[d] = 0;
      x[d] = lo[d];
    }
    if (d == D) return;
  }
}

struct ScanResult {
  bool feasible = false;
  Vector x;
  double objective = 0.0;
  long evaluated = 0;
};

ScanResult minimize(const Scan& scan, const GridSpec& g) {
  require(g.box_upper > 0.0 && std::isfinite(g.box_upper), "oracle: box_upper must be positive");
  require(g.passes >= 1 && g.refine_factor >= 2, "oracle: need >= 1 pass and refine_factor >= 2");
  require(g.coarse_points >= 1, "oracle: coarse_points must be >= 1");
  const int D = scan.grid_dim;
  if (static_cast<double>(g.coarse_points) > static_cast<double>(g.max_points))
    fail(ErrorKind::InvalidInput, "oracle: grid exceeds the point limit");
  const int per_axis =
      D == 0 ? 1
             : std::max(3, static_cast<int>(std::floor(
                               std::pow(static_cast<double>(g.coarse_points), 1.0 / D) + 1e-9)));
  std::vector<int> n(D, per_axis);
  Vector lo(D, 0.0), step(D, D == 0 ? 0.0 : g.box_upper / (per_axis - 1));
  ScanResult r;
  Best best;
  walk(scan, lo, step, n, best, r.evaluated);
  if (!std::isfinite(best.cost)) return r;
  for (int pass = 1; pass < g.passes && D > 0; ++pass) {
    // Local box of one old step around the winner at the finer spacing.
    std::fill(n.begin(), n.end(), 2 * g.refine_factor + 1);
    if (count_points(n, g.max_points) > g.max_points)
      fail(ErrorKind::InvalidInput, "oracle: refinement grid exceeds the point limit");
    for (int d = 0; d < D; ++d) {
      lo[d] = std::max(0.0, best.grid[d] - step[d]);
      step[d] /= g.refine_factor;
    }
    walk(scan, lo, step, n, best, r.evaluated);
  }
  r.feasible = true;
  r.x = best.full;
  r.objective = best.cost;
  return r;
}

// Minimizes sum_l a_l y_l over y_l >= lower_l and sum_l c[k][l] y_l >= b_k
// (K <= 2) by enumerating the vertices of the constraint lines.
double lp_completion(const Vector& a, const Vector& lower, const Matrix& c, const Vector& b,
                     Vector& y) {
  const int K = static_cast<int>(a.size());
  auto feasible = [&](const Vector& v) {
    for (int l = 0; l < K; ++l)
      if (!(v[l] >= lower[l] * (1.0 - kFeasTol))) return false;
    for (int k = 0; k < K; ++k) {
      double s = 0.0;
      for (int l = 0; l < K; ++l) s += c[k][l] * v[l];
      if (!at_least(s, b[k])) return false;
    }
    return true;
  };
  if (K == 1) {
    y = {lower[0]};
    if (b[0] > 0.0) y[0] = c[0][0] > 0.0 ? std::max(lower[0], b[0] / c[0][0]) : kInf;
    return std::isfinite(y[0]) ? a[0] * y[0] : kInf;
  }
  // Lines as (u, v, rhs): u y0 + v y1 = rhs.
  struct Line {
    double u, v, rhs;
  };
  std::vector<Line> lines{{1.0, 0.0, lower[0]}, {0.0, 1.0, lower[1]}};
  for (int k = 0; k < 2; ++k) lines.push_back({c[k][0], c[k][1], b[k]});
  double best = kInf;
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const Line& p = lines[i];
      const Line& q = lines[j];
      const double det = p.u * q.v - p.v * q.u;
      if (det == 0.0) continue;
      const Vector v{(p.rhs * q.v - p.v * q.rhs) / det, (p.u * q.rhs - p.rhs * q.u) / det};
      if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !feasible(v)) continue;
      const double cost = a[0] * v[0] + a[1] * v[1];
      if (cost < best) {
        best = cost;
        y = {std::max(v[0], lower[0]), std::max(v[1], lower[1])};
      }
    }
  return best;
}

}  // namespace

OracleResult grid_minimize_dedicated(const DedicatedProblem& prob, const GridSpec& grid) {
  const int N = static_cast<int>(prob.gains.size());
  require(N >= 1 && N <= 3, "oracle: dedicated instances are limited to N <= 3");
  require(prob.sigmas.size() == prob.gains.size() && prob.alpha_tilde.size() == prob.gains.size(),
          "oracle: inconsistent dedicated problem");
  Vector gamma(N);
  for (int i = 0; i < N; ++i) gamma[i] = prob.quality(i);
  const double bits = prob.r_dl / prob.bandwidth;
  const int last = N - 1;
  const double box = grid.box_upper * (1.0 + kFeasTol);
  Scan scan;
  scan.grid_dim = N - 1;
  scan.full_dim = N;
  scan.complete = [&](const Vector& x, Vector& p) {
    double rate = 0.0, harvest = 0.0;
    for (int i = 0; i < last; ++i) {
      p[i] = x[i];
      rate += std::log2(1.0 + gamma[i] * p[i]);
      harvest += prob.gains[i] * p[i];
    }
    double need = rate_completion(bits - rate, gamma[last]);
    const double h_left = prob.p_th - harvest;
    if (h_left > 0.0) need = std::max(need, prob.gains[last] > 0.0 ? h_left / prob.gains[last] : kInf);
    if (!(need <= box)) return kInf;
    p[last] = need;
    double r_all = 0.0, h_all = 0.0, cost = 0.0;
    for (int i = 0; i < N; ++i) {
      r_all += std::log2(1.0 + gamma[i] * p[i]);
      h_all += prob.gains[i] * p[i];
      cost += prob.alpha_tilde[i] * p[i];
    }
    if (!at_least(r_all, bits) || !at_least(h_all, prob.p_th)) return kInf;
    return cost;
  };
  const ScanResult s = minimize(scan, grid);
  OracleResult out;
  out.evaluated = s.evaluated;
  out.feasible = s.feasible;
  if (s.feasible) {
    out.p = {s.x};
    out.objective = s.objective;
  }
  return out;
}

OracleResult grid_minimize_hybrid(const HybridProblem& prob, const GridSpec& grid) {
  const int K = prob.num_users;
  const int N = prob.subcarriers;
  require(K >= 1 && K <= 2 && N >= 1 && K * N <= 4,
          "oracle: hybrid instances are limited to K <= 2, K*N <= 4");
  const int free_per_user = N - 1;
  const double box = grid.box_upper * (1.0 + kFeasTol);
  Scan scan;
  scan.grid_dim = K * free_per_user;
  scan.full_dim = K * N;
  scan.complete = [&](const Vector& x, Vector& full) {
    Vector a(K), lower(K), b(prob.p_th);
    Matrix c(K, Vector(K));
    for (int l = 0; l < K; ++l) {
      double rate = 0.0;
      for (int i = 0; i < free_per_user; ++i) {
        const double p = x[l * free_per_user + i];
        full[l * N + i] = p;
        rate += std::log2(1.0 + prob.gamma[l][i] * p);
        for (int k = 0; k < K; ++k) b[k] -= prob.cross[l][i][k] * p;
      }
      lower[l] = rate_completion(prob.bits[l] - rate, prob.gamma[l][N - 1]);
      if (!std::isfinite(lower[l])) return kInf;
      a[l] = prob.alpha_tilde[l][N - 1];
      for (int k = 0; k < K; ++k) c[k][l] = prob.cross[l][N - 1][k];
    }
    Vector y;
    if (!std::isfinite(lp_completion(a, lower, c, b, y))) return kInf;
    for (int l = 0; l < K; ++l) {
      if (!(y[l] <= box)) return kInf;
      full[l * N + N - 1] = y[l];
    }
    double cost = 0.0;
    for (int l = 0; l < K; ++l) {
      double rate = 0.0;
      for (int i = 0; i < N; ++i) {
        rate += std::log2(1.0 + prob.gamma[l][i] * full[l * N + i]);
        cost += prob.alpha_tilde[l][i] * full[l * N + i];
      }
      if (!at_least(rate, prob.bits[l])) return kInf;
    }
    for (int k = 0; k < K; ++k) {
      double harvest = 0.0;
      for (int l = 0; l < K; ++l)
        for (int i = 0; i < N; ++i) harvest += prob.cross[l][i][k] * full[l * N + i];
      if (!at_least(harvest, prob.p_th[k])) return kInf;
    }
    return cost;
  };
  const ScanResult s = minimize(scan, grid);
  OracleResult out;
  out.evaluated = s.evaluated;
  out.feasible = s.feasible;
  if (s.feasible) {
    out.p.assign(K, Vector(N));
    for (int l = 0; l < K; ++l)
      for (int i = 0; i < N; ++i) out.p[l][i] = s.x[l * N + i];
    out.objective = s.objective;
  }
  return out;
}

void check_oracle_limits(const SystemScenario& s, HarvestMode mode) {
  if (s.num_users > 2 || s.num_users * s.subcarriers > 4 ||
      (mode == HarvestMode::Dedicated && s.subcarriers > 3))
    fail(ErrorKind::InvalidInput,
         "oracle-check: instance too large (K=" + std::to_string(s.num_users) +
             ", N=" + std::to_string(s.subcarriers) + "); limits are K <= 2 and K*N <= 4");
}

std::vector<OracleCheck> compare_with_oracle(const SystemScenario& s, HarvestMode mode,
                                             const AllocationResult& alloc, long coarse_points) {
  check_oracle_limits(s, mode);
  auto sum = [](const Vector& v) { return std::accumulate(v.begin(), v.end(), 0.0); };
  auto weighted = [](const Matrix& at, const Matrix& p) -> double {
    double w = 0.0;
    for (std::size_t l = 0; l < p.size(); ++l)
      for (std::size_t i = 0; i < p[l].size(); ++i) w += at[l][i] * p[l][i];
    return w;
  };
  GridSpec g;
  g.coarse_points = coarse_points;
  std::vector<OracleCheck> out;
  auto record = [&](int user, double solver, OracleResult o) {
    OracleCheck c;
    c.user = user;
    c.solver_objective = solver;
    c.box_upper = g.box_upper;
    c.relative_gap = o.feasible ? (o.objective - solver) / std::max(std::abs(solver), 1e-300)
                                : std::numeric_limits<double>::infinity();
    c.oracle = std::move(o);
    out.push_back(std::move(c));
  };
  if (mode == HarvestMode::Dedicated) {
    for (int k = 0; k < s.num_users; ++k) {
      const DedicatedProblem prob =
          make_dedicated_problem(s, k, alloc.rho[k], sum(alloc.p_ul[k]), s.battery[k]);
      g.box_upper = 10.0 * sum(alloc.p_dl[k]);
      if (!(g.box_upper > 0.0)) g.box_upper = 1.0;
      record(k, weighted(Matrix{prob.alpha_tilde}, Matrix{alloc.p_dl[k]}), grid_minimize_dedicated(prob, g));
    }
  } else {
    Vector up, bat;
    for (int k = 0; k < s.num_users; ++k) {
      up.push_back(sum(alloc.p_ul[k]));
      bat.push_back(s.battery[k]);
    }
    const HybridProblem prob = make_hybrid_problem(s, alloc.rho, up, bat);
    g.box_upper = 10.0 * alloc.bs_power;
    if (!(g.box_upper > 0.0)) g.box_upper = 1.0;
    record(-1, weighted(prob.alpha_tilde, alloc.p_dl), grid_minimize_hybrid(prob, g));
  }
  return out;
}

}  // namespace swipt

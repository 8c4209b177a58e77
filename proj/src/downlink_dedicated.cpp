#include "swipt/downlink_dedicated.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "swipt/error.hpp"
#include "swipt/uplink.hpp"

namespace swipt {

double DedicatedProblem::quality(int i) const {
  return (1.0 - rho) * gains[i] / sigmas[i];
}

double power_threshold(double uplink_total, double p0, double p0_prime, double p_bat, double eta,
                       double rho, double sigma_sum) {
  require(eta > 0.0 && eta < 1.0, "power_threshold: eta must lie in (0,1)");
  require(rho >= 0.0 && rho <= 1.0, "power_threshold: rho must lie in [0,1]");
  const double need = uplink_total + p0 + p0_prime - p_bat;
  if (rho == 0.0) {
    if (need > 0.0)
      fail(ErrorKind::Infeasible, "power_threshold: positive harvest requirement with rho = 0");
    return -sigma_sum;
  }
  return need / (eta * rho) - sigma_sum;
}

Vector dedicated_alpha_tilde(double alpha, double beta, double eta, double rho,
                             std::span<const double> gains) {
  Vector out(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    out[i] = alpha - beta * eta * rho * gains[i];
    if (gains[i] > 0.0 && !(out[i] > 0.0))
      fail(ErrorKind::Infeasible,
           "kappa bound violated: alpha_tilde <= 0 on subcarrier " + std::to_string(i));
  }
  return out;
}

DedicatedProblem make_dedicated_problem(const SystemScenario& s, int k, double rho,
                                        double uplink_total, double battery) {
  DedicatedProblem prob;
  prob.gains = s.channels.downlink_gain.at(k);
  prob.sigmas = s.noise.sigma_dl.at(k);
  prob.rho = rho;
  prob.r_dl = s.rates.r_dl.at(k);
  prob.bandwidth = s.bandwidth;
  prob.alpha_tilde = dedicated_alpha_tilde(s.costs.alpha, s.costs.beta.at(k), s.eta, rho,
                                           prob.gains);
  // The threshold subtracts the uplink noise sum, as written for this model.
  const auto& sig_ul = s.noise.sigma_ul.at(k);
  const double sigma_sum = std::accumulate(sig_ul.begin(), sig_ul.end(), 0.0);
  prob.p_th = power_threshold(uplink_total, s.p0, s.p0_prime, battery, s.eta, rho, sigma_sum);
  return prob;
}

namespace {

void check_problem(const DedicatedProblem& prob) {
  const std::size_t n = prob.gains.size();
  require(n > 0, "downlink: no subcarriers");
  require(prob.sigmas.size() == n && prob.alpha_tilde.size() == n,
          "downlink: gains/sigmas/alpha_tilde size mismatch");
  require(prob.rho >= 0.0 && prob.rho < 1.0, "downlink: rho must lie in [0,1)");
  require(prob.bandwidth > 0.0, "downlink: bandwidth must be > 0");
  require(prob.r_dl >= 0.0, "downlink: rate threshold must be >= 0");
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    require(prob.gains[i] >= 0.0 && prob.sigmas[i] > 0.0, "downlink: bad gain or noise");
    if (prob.gains[i] > 0.0) {
      any = true;
      if (!(prob.alpha_tilde[i] > 0.0))
        fail(ErrorKind::Infeasible, "kappa bound violated: alpha_tilde <= 0 on subcarrier " +
                                        std::to_string(i));
    }
  }
  if (!any) fail(ErrorKind::Infeasible, "downlink: no subcarrier with a positive gain");
}

// log(lambda') and the sign of the product inside its root.
struct LambdaLog {
  double log_lambda;
  bool positive;
};

LambdaLog lambda_log(double x, const DedicatedProblem& prob, std::span<const int> set) {
  require(!set.empty(), "downlink: empty active set");
  double log_prod = 0.0;
  bool positive = true;
  for (int i : set) {
    const double w = prob.alpha_tilde[i] - x * prob.gains[i];
    if (w == 0.0) fail(ErrorKind::Pole, "pole at subcarrier " + std::to_string(i));
    if (w < 0.0) positive = !positive;
    log_prod += std::log(prob.quality(i) / std::abs(w));
  }
  const double n = static_cast<double>(set.size());
  const double bits = prob.r_dl / prob.bandwidth;
  return {(bits * std::numbers::ln2 - log_prod) / n, positive};
}

double noise_term(const DedicatedProblem& prob, std::span<const int> set) {
  double s = 0.0;
  for (int i : set) s += prob.sigmas[i] / (1.0 - prob.rho);
  return s;
}

Vector weights_at(const DedicatedProblem& prob, double psi) {
  Vector w(prob.gains.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = prob.gains[i] > 0.0 ? prob.alpha_tilde[i] - psi * prob.gains[i] : prob.alpha_tilde[i];
  return w;
}

Vector qualities(const DedicatedProblem& prob) {
  Vector q(prob.gains.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = prob.quality(static_cast<int>(i));
  return q;
}

}  // namespace

double evaluate_f(double x, const DedicatedProblem& prob, std::span<const int> active_set) {
  const LambdaLog ll = lambda_log(x, prob, active_set);
  if (!ll.positive)
    fail(ErrorKind::InvalidInput, "evaluate_f: x lies in a non-admissible interval");
  double ratio_sum = 0.0;
  for (int i : active_set) ratio_sum += prob.gains[i] / (prob.alpha_tilde[i] - x * prob.gains[i]);
  return std::exp(ll.log_lambda) * ratio_sum - prob.p_th - noise_term(prob, active_set);
}

double compute_lambda(double psi, const DedicatedProblem& prob, std::span<const int> active_set) {
  for (int i : active_set)
    require(prob.alpha_tilde[i] - psi * prob.gains[i] > 0.0,
            "compute_lambda: alpha_tilde - psi g must be positive on the active set");
  return std::exp(lambda_log(psi, prob, active_set).log_lambda);
}

double find_psi(const DedicatedProblem& prob, std::span<const int> active_set,
                const BisectionOptions& opt) {
  require(!active_set.empty(), "find_psi: empty active set");
  if (prob.p_th <= 0.0) return 0.0;
  const double f0 = evaluate_f(0.0, prob, active_set);
  if (f0 >= 0.0) return 0.0;

  // Poles with multiplicity; coincident poles are merged but still counted
  // twice when deciding whether an interval keeps the product positive.
  Vector poles;
  for (int i : active_set)
    if (prob.gains[i] > 0.0) poles.push_back(prob.alpha_tilde[i] / prob.gains[i]);
  std::sort(poles.begin(), poles.end());
  std::vector<std::pair<double, int>> merged;
  for (double p : poles) {
    if (!merged.empty() && p == merged.back().first)
      ++merged.back().second;
    else
      merged.emplace_back(p, 1);
  }

  const double scale = std::abs(prob.p_th) + noise_term(prob, active_set);
  int below = 0;  // poles (with multiplicity) at or left of the interval start
  for (std::size_t l = 0; l <= merged.size(); ++l) {
    if (l > 0) below += merged[l - 1].second;
    if (below % 2 != 0) continue;
    const double start = l == 0 ? 0.0 : merged[l - 1].first;
    const bool bounded = l < merged.size();
    const double end = bounded ? merged[l].first : 2.0 * start + 1.0;
    const double width = end - start;
    double lo = l == 0 ? 0.0 : start + opt.pad * width;
    double hi = bounded ? end - opt.pad * width : start + 1e6 * (start + 1.0);
    const double flo = l == 0 ? f0 : evaluate_f(lo, prob, active_set);
    const double fhi = evaluate_f(hi, prob, active_set);
    if (!(flo < 0.0 && fhi > 0.0)) continue;

    // Stop once the bracket is tight and the residual small, or when the
    // bracket cannot shrink further in double precision (f steep near a pole).
    double best_x = lo;
    double best_f = std::abs(flo);
    bool exhausted = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) {
        exhausted = true;
        break;
      }
      const double fm = evaluate_f(mid, prob, active_set);
      if (std::abs(fm) <= best_f) {
        best_f = std::abs(fm);
        best_x = mid;
      }
      if (fm == 0.0) break;
      if (fm < 0.0)
        lo = mid;
      else
        hi = mid;
      if (hi - lo <= opt.tol_psi * std::max(std::abs(mid), std::numeric_limits<double>::min()) &&
          best_f <= opt.tol_f * scale)
        break;
    }
    if (best_f > opt.tol_f * scale && !exhausted)
      fail(ErrorKind::NonConvergence, "find_psi: bisection residual too large");
    const double mid = best_x;
    return mid;
  }
  fail(ErrorKind::Infeasible, "find_psi: no admissible interval brackets a zero of f (f(0) = " +
                                  std::to_string(f0) + ")");
}

DedicatedDownlinkSolution solve_downlink_dedicated(const DedicatedProblem& prob,
                                                   const BisectionOptions& opt) {
  check_problem(prob);
  const int n = static_cast<int>(prob.gains.size());
  const double bits = prob.r_dl / prob.bandwidth;
  const Vector quality = qualities(prob);

  DedicatedDownlinkSolution sol;
  sol.p_th = prob.p_th;
  auto harvest_of = [&](const Vector& p) {
    double h = 0.0;
    for (int i = 0; i < n; ++i) h += p[i] * prob.gains[i];
    return h;
  };
  auto finish_water_filling = [&](WaterFilling wf, double psi) {
    sol.p_dl = std::move(wf.p);
    sol.lambda = wf.level;
    sol.psi = psi;
    sol.active_set = std::move(wf.active);
    sol.rate_binding = bits > 0.0;
    sol.harvest_binding = psi > 0.0;
    return sol;
  };

  WaterFilling wf0 = weighted_water_fill(prob.alpha_tilde, quality, bits);
  if (prob.p_th <= 0.0 || harvest_of(wf0.p) >= prob.p_th) return finish_water_filling(wf0, 0.0);

  // Cheapest subcarrier per unit of harvested power.
  int best = -1;
  double phi_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (prob.gains[i] <= 0.0) continue;
    const double phi = prob.alpha_tilde[i] / prob.gains[i];
    if (phi < phi_min) {
      phi_min = phi;
      best = i;
    }
  }
  const double corner_power = prob.p_th / prob.gains[best];
  if (bits == 0.0 || std::log2(1.0 + quality[best] * corner_power) >= bits) {
    sol.p_dl.assign(prob.gains.size(), 0.0);
    sol.p_dl[best] = corner_power;
    sol.lambda = 0.0;
    sol.psi = phi_min;
    sol.active_set = {best};
    sol.harvest_binding = true;
    sol.harvest_corner = true;
    sol.rate_binding = false;
    return sol;
  }

  // The harvest delivered by the weighted water-filling at price psi is
  // non-decreasing in psi; bracket its crossing of p_th inside [0, phi_min).
  auto fill_at = [&](double psi) {
    return weighted_water_fill(weights_at(prob, psi), quality, bits);
  };
  double lo = 0.0;
  double hi = phi_min;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (harvest_of(fill_at(mid).p) < prob.p_th)
      lo = mid;
    else
      hi = mid;
  }
  double psi = 0.5 * (lo + hi);
  IndexSet set = fill_at(psi).active;

  // Polish on the settled active set with the multiplier function itself.
  try {
    const double refined = find_psi(prob, set, opt);
    if (refined > 0.0 && refined < phi_min && fill_at(refined).active == set) psi = refined;
  } catch (const SolverError&) {
  }

  sol.psi = psi;
  sol.active_set = set;
  sol.lambda = compute_lambda(psi, prob, set);
  sol.p_dl.assign(prob.gains.size(), 0.0);
  for (int i : set)
    sol.p_dl[i] = std::max(0.0, sol.lambda / (prob.alpha_tilde[i] - psi * prob.gains[i]) -
                                    1.0 / quality[i]);
  sol.rate_binding = true;
  sol.harvest_binding = true;
  return sol;
}

double dedicated_stationarity_residual(const DedicatedProblem& prob,
                                       const DedicatedDownlinkSolution& sol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < prob.gains.size(); ++i) {
    if (prob.gains[i] <= 0.0) continue;
    const double gamma = prob.quality(static_cast<int>(i));
    const double grad = prob.alpha_tilde[i] - sol.psi * prob.gains[i] -
                        sol.lambda * gamma / (1.0 + gamma * sol.p_dl[i]);
    const double r = sol.p_dl[i] > 0.0 ? std::abs(grad) : std::max(0.0, -grad);
    worst = std::max(worst, r / prob.alpha_tilde[i]);
  }
  return worst;
}

}  // namespace swipt

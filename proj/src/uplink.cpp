#include "swipt/uplink.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swipt/error.hpp"

namespace swipt {

WaterFilling weighted_water_fill(std::span<const double> weights, std::span<const double> quality,
                                 double bits) {
  require(weights.size() == quality.size(), "water-filling: weights/quality size mismatch");
  require(bits >= 0.0, "water-filling: target must be >= 0");
  const int n = static_cast<int>(weights.size());
  WaterFilling out;
  out.p.assign(weights.size(), 0.0);
  if (bits == 0.0) return out;

  IndexSet active;
  for (int i = 0; i < n; ++i) {
    if (quality[i] > 0.0) {
      require(weights[i] > 0.0, "water-filling: weights must be > 0");
      active.push_back(i);
    }
  }
  if (active.empty()) fail(ErrorKind::Infeasible, "no subcarrier with a positive gain");

  // Drop the worst subcarrier (largest w/q; higher index on ties) until every
  // allocation is non-negative. log2(level) = (bits - sum log2(q/w)) / |S|.
  double log2_level = 0.0;
  for (;;) {
    double sum = 0.0;
    for (int i : active) sum += std::log2(quality[i] / weights[i]);
    log2_level = (bits - sum) / static_cast<double>(active.size());
    int worst = -1;
    double worst_ratio = -1.0;
    for (int i : active) {
      const double ratio = weights[i] / quality[i];
      if (ratio >= worst_ratio) {
        worst_ratio = ratio;
        worst = i;
      }
    }
    // p_worst < 0  <=>  level < w/q
    if (log2_level >= std::log2(worst_ratio) || active.size() == 1) break;
    active.erase(std::find(active.begin(), active.end(), worst));
  }
  out.level = std::exp2(log2_level);
  for (int i : active) out.p[i] = std::max(0.0, out.level / weights[i] - 1.0 / quality[i]);
  out.active = std::move(active);
  return out;
}

double UplinkSolution::total() const { return std::accumulate(p_ul.begin(), p_ul.end(), 0.0); }

UplinkSolution solve_uplink(std::span<const double> gains, std::span<const double> sigmas,
                            double bandwidth, double r_ul) {
  require(gains.size() == sigmas.size(), "uplink: gains/sigmas size mismatch");
  require(bandwidth > 0.0, "uplink: bandwidth must be > 0");
  require(r_ul >= 0.0, "uplink: rate threshold must be >= 0");
  Vector quality(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    require(sigmas[i] > 0.0, "uplink: noise must be > 0");
    quality[i] = gains[i] / sigmas[i];
  }
  const Vector unit(gains.size(), 1.0);
  WaterFilling wf = weighted_water_fill(unit, quality, r_ul / bandwidth);
  return {std::move(wf.p), wf.level, std::move(wf.active)};
}

}  // namespace swipt

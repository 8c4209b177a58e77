#pragma once

#include <span>

#include "swipt/model.hpp"

namespace swipt {

// Weighted water-filling: minimize sum_i w_i p_i subject to
// sum_i log2(1 + q_i p_i) >= bits, p >= 0, with w_i > 0 and q_i >= 0
// (q_i = 0 marks an unusable subcarrier). Optimal powers are
// p_i = [level / w_i - 1 / q_i]^+.
struct WaterFilling {
  Vector p;
  double level = 0.0;  // common water level (lambda' in the downlink, nu in the uplink)
  IndexSet active;
};

WaterFilling weighted_water_fill(std::span<const double> weights, std::span<const double> quality,
                                 double bits);

struct UplinkSolution {
  Vector p_ul;
  double nu = 0.0;
  IndexSet active_set;

  double total() const;
};

// Minimum-power uplink allocation meeting r_ul on one user's subcarriers.
UplinkSolution solve_uplink(std::span<const double> gains, std::span<const double> sigmas,
                            double bandwidth, double r_ul);

}  // namespace swipt

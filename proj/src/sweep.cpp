#include "swipt/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "swipt/error.hpp"
#include "swipt/rho_optimizer.hpp"
#include "swipt/simulation.hpp"

namespace swipt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector range(double lo, double hi, double step) {
  Vector v;
  for (int j = 0;; ++j) {
    const double x = lo + j * step;
    if (x > hi + 1e-9 * std::abs(step)) break;
    v.push_back(x);
  }
  return v;
}

std::string fmt_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string label(const std::string& key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%g", key.c_str(), v);
  return buf;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  jobs = std::clamp(jobs, 1, std::max(1, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

struct Keyed {
  int series = 0;
  int x = 0;
  SweepRow row;
};

using Cell = std::vector<Keyed>;

bool recoverable(const SolverError& e) { return e.kind() != ErrorKind::InvalidInput; }

// Per-user mean of the optimal ratios.
double mean_of(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

double user_power(const SystemScenario& s, const AllocationResult& a) {
  double total = a.bs_power;
  for (int k = 0; k < s.num_users; ++k) total += total_user_power(s, k, a.p_ul[k]);
  return total;
}

struct Plan {
  std::vector<std::string> metrics;
  std::vector<std::string> series;
  Vector x;
  bool per_rep_only = false;  // one task covers every x (fig3)
  std::function<Cell(int rep, int xi)> run;
};

Plan plan_fig3(const SweepConfig& cfg) {
  Plan p;
  p.metrics = {"objective", "sum_power"};
  p.x = rho_grid(cfg.grid_step);
  for (double v : cfg.series_values) p.series.push_back(label("snr_ul_db", v));
  p.per_rep_only = true;
  p.run = [cfg, p](int rep, int) {
    Cell cell;
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    for (int si = 0; si < static_cast<int>(cfg.series_values.size()); ++si) {
      ScenarioSpec spec = cfg.base;
      spec.snr_ul_db = cfg.series_values[si];
      const SystemScenario s = generate(spec, seed);
      RhoSearchOptions ro;
      ro.grid_step = cfg.grid_step;
      RhoSearchReport rep_curve;
      try {
        rep_curve = optimize(s, HarvestMode::Dedicated, ro).report;
      } catch (const SolverError& e) {
        if (!recoverable(e)) throw;
      }
      for (int xi = 0; xi < static_cast<int>(p.x.size()); ++xi) {
        // Sum the per-user curves; K = 1 in the preset.
        double obj = 0.0, sum = 0.0;
        if (rep_curve.objective_curve.empty()) {
          obj = sum = kNaN;
        } else {
          for (int k = 0; k < s.num_users; ++k) {
            obj += rep_curve.objective_curve[k][xi];
            sum += rep_curve.sum_power_curve[k][xi];
          }
          obj += s.costs.varsigma;
        }
        cell.push_back({si, xi, {p.series[si], p.x[xi], rep, {obj, sum}}});
      }
    }
    return cell;
  };
  return p;
}

Plan plan_fig4(const SweepConfig& cfg) {
  Plan p;
  p.metrics = {"rho_opt", "objective", "sum_power"};
  p.x = cfg.x_values;
  p.series = {"optimal"};
  p.run = [cfg, p](int rep, int xi) {
    ScenarioSpec spec = cfg.base;
    spec.snr_ul_db = p.x[xi];
    const SystemScenario s = generate(spec, derive_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
    RhoSearchOptions ro;
    ro.grid_step = cfg.grid_step;
    Vector m{kNaN, kNaN, kNaN};
    try {
      const OptimizeResult r = optimize(s, HarvestMode::Dedicated, ro);
      m = {mean_of(r.allocation.rho), r.allocation.objective, user_power(s, r.allocation)};
    } catch (const SolverError& e) {
      if (!recoverable(e)) throw;
    }
    return Cell{{0, xi, {p.series[0], p.x[xi], rep, m}}};
  };
  return p;
}

Plan plan_fig5(const SweepConfig& cfg) {
  Plan p;
  p.metrics = {"objective", "sum_power", "bs_power"};
  p.x = cfg.x_values;
  p.series = {"optimal", label("fixed_rho", cfg.fixed_rho)};
  p.run = [cfg, p](int rep, int xi) {
    ScenarioSpec spec = cfg.base;
    spec.snr_dl_db = p.x[xi];
    const SystemScenario s = generate(spec, derive_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
    Cell cell;
    for (int si = 0; si < 2; ++si) {
      RhoSearchOptions ro;
      ro.grid_step = cfg.grid_step;
      if (si == 1) ro.fixed_rho = cfg.fixed_rho;
      Vector m{kNaN, kNaN, kNaN};
      try {
        const AllocationResult a = optimize(s, HarvestMode::Dedicated, ro).allocation;
        m = {a.objective, user_power(s, a), a.bs_power};
      } catch (const SolverError& e) {
        if (!recoverable(e)) throw;
      }
      cell.push_back({si, xi, {p.series[si], p.x[xi], rep, m}});
    }
    return cell;
  };
  return p;
}

Plan plan_fig6(const SweepConfig& cfg) {
  Plan p;
  p.metrics = {"objective", "bs_power", "outage_fraction"};
  p.x = cfg.x_values;
  p.series = {"harvesting", "battery_only"};
  p.run = [cfg, p](int rep, int xi) {
    ScenarioSpec spec = cfg.base;
    spec.kappa = p.x[xi];
    spec.beta.reset();
    spec.cross_gains = false;
    const SystemScenario s = generate(spec, derive_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
    Cell cell;
    Vector m{kNaN, kNaN, kNaN};
    try {
      RhoSearchOptions ro;
      ro.grid_step = cfg.grid_step;
      const AllocationResult a = optimize(s, HarvestMode::Dedicated, ro).allocation;
      m = {a.objective, a.bs_power, 0.0};
    } catch (const SolverError& e) {
      if (!recoverable(e)) throw;
    }
    cell.push_back({0, xi, {p.series[0], p.x[xi], rep, m}});
    const BaselineResult b = battery_only(s);
    const double outages =
        static_cast<double>(std::count(b.outage.begin(), b.outage.end(), true));
    cell.push_back({1, xi,
                    {p.series[1], p.x[xi], rep,
                     {b.utility, b.allocation.bs_power, outages / s.num_users}}});
    return cell;
  };
  return p;
}

Plan plan_fig7(const SweepConfig& cfg) {
  Plan p;
  p.metrics = {"lifetime", "capped", "infeasible_slots"};
  p.x = cfg.x_values;
  for (double e : cfg.series_values) p.series.push_back(label("epsilon", e));
  p.run = [cfg, p](int rep, int xi) {
    ScenarioSpec spec = cfg.base;
    spec.num_users = static_cast<int>(std::lround(p.x[xi]));
    spec.beta.reset();
    spec.distances.reset();
    LifetimeOptions lo;
    lo.cap = cfg.lifetime_cap;
    lo.grid_step = cfg.grid_step;
    const std::uint64_t seed =
        derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(xi));
    Cell cell;
    for (int si = 0; si < static_cast<int>(cfg.series_values.size()); ++si) {
      const SimTrace t = simulate_lifetime(spec, cfg.series_values[si], seed, lo);
      cell.push_back({si, xi,
                      {p.series[si], p.x[xi], rep,
                       {static_cast<double>(t.lifetime), t.capped ? 1.0 : 0.0,
                        static_cast<double>(t.infeasible_slots)}}});
    }
    return cell;
  };
  return p;
}

Plan plan_fig8(const SweepConfig& cfg) {
  Plan p;
  p.metrics = {"bs_power", "objective"};
  p.x = cfg.x_values;
  for (double k : cfg.series_values) {
    p.series.push_back(label("K", k) + " dedicated");
    p.series.push_back(label("K", k) + " hybrid");
  }
  p.run = [cfg, p](int rep, int xi) {
    Cell cell;
    for (int ki = 0; ki < static_cast<int>(cfg.series_values.size()); ++ki) {
      ScenarioSpec spec = cfg.base;
      spec.num_users = static_cast<int>(std::lround(cfg.series_values[ki]));
      spec.snr_dl_db = p.x[xi];
      spec.beta.reset();
      spec.distances.reset();
      spec.cross_gains = true;
      const SystemScenario s = generate(
          spec, derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(ki)));
      RhoSearchOptions ro;
      ro.fixed_rho = cfg.fixed_rho;
      for (int mi = 0; mi < 2; ++mi) {
        const HarvestMode mode = mi == 0 ? HarvestMode::Dedicated : HarvestMode::Hybrid;
        Vector m{kNaN, kNaN};
        try {
          const AllocationResult a = optimize(s, mode, ro).allocation;
          m = {a.bs_power, a.objective};
        } catch (const SolverError& e) {
          if (!recoverable(e)) throw;
        }
        const int si = 2 * ki + mi;
        cell.push_back({si, xi, {p.series[si], p.x[xi], rep, m}});
      }
    }
    return cell;
  };
  return p;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig3", "fig4", "fig5", "fig6", "fig7", "fig8"};
  return names;
}

SweepConfig preset_config(const std::string& name) {
  SweepConfig c;
  c.preset = name;
  ScenarioSpec& b = c.base;
  b.num_users = 1;
  b.subcarriers = 5;
  b.snr_dl_db = 10.0;
  b.snr_ul_db = 10.0;
  b.r_dl_bps = 15e3;
  b.r_ul_bps = 30e3;
  b.kappa = 1e-3;
  b.cross_gains = false;
  const double sigma = b.sigma();
  if (name == "fig3") {
    c.series_values = {0.0, 5.0, 10.0};
  } else if (name == "fig4") {
    b.r_dl_bps = 300e3;
    b.r_ul_bps = 150e3;
    c.x_values = range(0.0, 10.0, 2.0);
  } else if (name == "fig5") {
    c.x_values = range(0.0, 10.0, 2.0);
  } else if (name == "fig6") {
    b.num_users = 50;
    // A 30 kbit/s uplink needs less than the harvested noise floor, which
    // would leave the harvest constraint slack; 300 kbit/s makes it bind.
    b.r_ul_bps = 300e3;
    b.battery_w = 20.0 * sigma;
    c.x_values = range(0.0, 0.02, 0.002);
    c.repetitions = 20;
  } else if (name == "fig7") {
    b.r_dl_bps = 100e3;
    b.r_ul_bps = 1e6;
    b.kappa = 0.0;
    b.battery_w = 3e5 * sigma;  // about 28 slots of mean uplink need
    c.x_values = {1.0, 2.0, 4.0, 8.0};
    c.series_values = {0.01, 0.25, 0.5, 0.75, 1.0};
    c.repetitions = 10;
    c.grid_step = 0.05;
    c.lifetime_cap = 1000;
  } else if (name == "fig8") {
    b.kappa = 0.0;
    b.r_ul_bps = 300e3;  // binding harvest, as for fig6
    b.cross_gains = true;
    c.x_values = range(0.0, 10.0, 2.0);
    c.series_values = {2.0, 4.0};
    c.repetitions = 50;
  } else {
    fail(ErrorKind::InvalidInput, "unknown preset '" + name + "'");
  }
  return c;
}

SweepTable run_sweep(const SweepConfig& cfg) {
  require(cfg.repetitions >= 0, "repetitions must be >= 0");
  require(cfg.jobs >= 1, "jobs must be >= 1");
  validate(cfg.base);
  Plan plan;
  if (cfg.preset == "fig3") plan = plan_fig3(cfg);
  else if (cfg.preset == "fig4") plan = plan_fig4(cfg);
  else if (cfg.preset == "fig5") plan = plan_fig5(cfg);
  else if (cfg.preset == "fig6") plan = plan_fig6(cfg);
  else if (cfg.preset == "fig7") plan = plan_fig7(cfg);
  else if (cfg.preset == "fig8") plan = plan_fig8(cfg);
  else fail(ErrorKind::InvalidInput, "unknown preset '" + cfg.preset + "'");

  const int nx = plan.per_rep_only ? 1 : static_cast<int>(plan.x.size());
  const int tasks = cfg.repetitions * nx;
  std::vector<Cell> cells(static_cast<std::size_t>(tasks));
  parallel_for(tasks, cfg.jobs, [&](int t) { cells[t] = plan.run(t / nx, t % nx); });

  std::vector<Keyed> all;
  for (auto& c : cells)
    for (auto& k : c) all.push_back(std::move(k));
  std::stable_sort(all.begin(), all.end(), [](const Keyed& a, const Keyed& b) {
    if (a.series != b.series) return a.series < b.series;
    if (a.x != b.x) return a.x < b.x;
    return a.row.rep < b.row.rep;
  });

  SweepTable table;
  table.preset = cfg.preset;
  table.metric_names = plan.metrics;
  const std::size_t nm = plan.metrics.size();
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    Vector sum(nm, 0.0);
    std::vector<int> count(nm, 0);
    while (j < all.size() && all[j].series == all[i].series && all[j].x == all[i].x) {
      for (std::size_t m = 0; m < nm; ++m)
        if (!std::isnan(all[j].row.metrics[m])) {
          sum[m] += all[j].row.metrics[m];
          ++count[m];
        }
      ++j;
    }
    SweepRow mean{all[i].row.series, all[i].row.x, -1, Vector(nm, kNaN)};
    for (std::size_t m = 0; m < nm; ++m)
      if (count[m] > 0) mean.metrics[m] = sum[m] / count[m];
    table.means.push_back(std::move(mean));
    for (; i < j; ++i) table.rows.push_back(std::move(all[i].row));
  }
  return table;
}

void write_csv(std::ostream& os, const SweepTable& table,
               const std::vector<std::string>& header_comments) {
  for (const auto& line : header_comments) os << "# " << line << '\n';
  os << "kind,series,x,rep";
  for (const auto& m : table.metric_names) os << ',' << m;
  os << '\n';
  auto emit = [&](const char* kind, const SweepRow& r) {
    os << kind << ',' << r.series << ',' << fmt_num(r.x) << ',';
    if (r.rep >= 0) os << r.rep;
    for (double v : r.metrics) os << ',' << fmt_num(v);
    os << '\n';
  };
  for (const auto& r : table.rows) emit("rep", r);
  for (const auto& r : table.means) emit("mean", r);
}

}  // namespace swipt

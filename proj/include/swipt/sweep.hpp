#pragma once
// Monte-Carlo experiment sweeps behind the figure presets fig3 ... fig8.
//
//   fig3  x = rho grid,              series = uplink SNR (dB)
//   fig4  x = uplink SNR (dB),       series = optimal rho
//   fig5  x = downlink SNR (dB),     series = optimal rho, fixed rho
//   fig6  x = kappa,                 series = harvesting, battery only
//   fig7  x = number of users,       series = epsilon
//   fig8  x = downlink SNR (dB),     series = K x {dedicated, hybrid} at fixed rho
//
// Repetition r of every (series, x) cell uses the scenario seed
// derive_seed(seed, r), so all series and x values share channel draws.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "swipt/scenario.hpp"

namespace swipt {

struct SweepConfig {
  std::string preset;
  ScenarioSpec base;
  Vector x_values;       // ignored by fig3, whose x axis is the rho grid
  Vector series_values;  // fig3 uplink SNRs, fig7 epsilons, fig8 user counts
  int repetitions = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
  double grid_step = 0.01;
  double fixed_rho = 0.5;    // fig5 fixed series, fig8
  long lifetime_cap = 1000;  // fig7
};

// Defaults for a named preset. Throws InvalidInput for unknown names.
SweepConfig preset_config(const std::string& name);
const std::vector<std::string>& preset_names();

struct SweepRow {
  std::string series;
  double x = 0.0;
  int rep = -1;  // -1 on aggregated rows
  Vector metrics;
};

struct SweepTable {
  std::string preset;
  std::vector<std::string> metric_names;
  std::vector<SweepRow> rows;   // one per (series, x, repetition)
  std::vector<SweepRow> means;  // one per (series, x); NaN entries are skipped
};

// Deterministic in the config; `jobs` only changes the wall time.
SweepTable run_sweep(const SweepConfig& cfg);

// CSV with a '# ' comment block, then columns kind,series,x,rep,<metrics>.
// Numbers use %.17g; missing values print as nan.
void write_csv(std::ostream& os, const SweepTable& table,
               const std::vector<std::string>& header_comments);

}  // namespace swipt

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "oceannet/checkpoint.hpp"
#include "oceannet/dataset.hpp"
#include "oceannet/metrics.hpp"

namespace oceannet {

/// A rollout from truth frame `init_index`; frames[k] is the state k+1 lead
/// intervals later, in physical units.
struct Forecast {
  std::size_t init_index = 0;
  OceanDataset data;
};

/// Roll the checkpoint's operator `steps` lead intervals from truth frame
/// `init_index`. Throws DimensionError on a grid mismatch and RolloutError
/// (with the step index) on a non-finite state.
Forecast make_forecast(const Checkpoint& ckpt, const OceanDataset& truth, std::size_t init_index,
                       std::size_t steps);

/// ONDS file plus a sidecar recording the initial index.
void write_forecast(const std::filesystem::path& path, const Forecast& f);
Forecast read_forecast(const std::filesystem::path& path);

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation across initializations
  std::size_t count = 0;  // initializations where the metric was defined
};

struct LeadRow {
  std::size_t lead_step = 0;
  MetricStats model_rmse, model_cc, model_mhd;
  MetricStats persist_rmse, persist_cc, persist_mhd;
};

struct EvalReport {
  std::vector<LeadRow> rows;  // lead 0 .. steps
  double rmse_sat = 0.0, cc_sat = 0.0, mhd_sat = 0.0;
  double level = 0.0;
  std::size_t n_inits = 0;
};

struct EvalOptions {
  std::optional<double> level;  // default: 85th percentile of training-split SSH
  double km_per_cell = 1.0;
  std::size_t sat_pairs = 1000;
  double sat_factor = 0.95;
  std::uint64_t seed = 0;
};

/// Per-lead metrics of each forecast and of persistence against the truth,
/// aggregated over forecasts, plus saturation values from the truth's
/// training split.
EvalReport evaluate(const OceanDataset& truth, std::span<const Forecast> forecasts,
                    const EvalOptions& opts = {});

/// Writes `path` (means), `<stem>_std.csv` (standard deviations) and
/// `saturation.csv` beside it.
void write_report(const std::filesystem::path& path, const EvalReport& report);

}  // namespace oceannet

#include "oceannet/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "json.hpp"
#include "oceannet/errors.hpp"
#include "oceannet/fno.hpp"
#include "oceannet/pec.hpp"
#include "oceannet/train.hpp"

namespace oceannet {

namespace {

struct Accumulator {
  std::vector<double> values;
  void add(double v) { values.push_back(v); }
  MetricStats stats() const {
    MetricStats s;
    s.count = values.size();
    if (values.empty()) {
      s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
      return s;
    }
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
  }
};

struct LeadAccumulators {
  Accumulator rmse, cc, mhd;
  void add(const FieldState& pred, const FieldState& truth, double level, double km) {
    rmse.add(oceannet::rmse(pred, truth));
    try {
      cc.add(pearson_cc(pred, truth));
    } catch (const UndefinedMetricError&) {
    }
    try {
      mhd.add(oceannet::mhd(extract_contour(pred, level), extract_contour(truth, level), km));
    } catch (const UndefinedMetricError&) {
    }
  }
};

void write_rows(const std::filesystem::path& path, const EvalReport& r, bool stddev) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << "lead_step,model_rmse,model_cc,model_mhd,persist_rmse,persist_cc,persist_mhd\n";
  os << std::setprecision(17);
  auto pick = [&](const MetricStats& s) { return stddev ? s.std : s.mean; };
  for (const auto& row : r.rows) {
    os << row.lead_step << ',' << pick(row.model_rmse) << ',' << pick(row.model_cc) << ','
       << pick(row.model_mhd) << ',' << pick(row.persist_rmse) << ',' << pick(row.persist_cc) << ','
       << pick(row.persist_mhd) << '\n';
  }
}

}  // namespace

Forecast make_forecast(const Checkpoint& ckpt, const OceanDataset& truth, std::size_t init_index,
                       std::size_t steps) {
  const auto& cfg = ckpt.params.config;
  if (cfg.grid_h != truth.height() || cfg.grid_w != truth.width()) {
    throw DimensionError("checkpoint grid " + std::to_string(cfg.grid_h) + "x" +
                         std::to_string(cfg.grid_w) + " does not match dataset grid " +
                         std::to_string(truth.height()) + "x" + std::to_string(truth.width()));
  }
  if (init_index >= truth.n_time()) {
    throw ConfigError("init index " + std::to_string(init_index) + " out of range (dataset has " +
                      std::to_string(truth.n_time()) + " frames)");
  }
  OceanDataset out;
  out.mask = truth.mask;
  out.lead_days = truth.lead_days;
  out.ocean_mean = ckpt.ocean_mean;
  out.ocean_std = ckpt.ocean_std;
  out.storage = StorageType::F64;

  tune_allocator();
  const FieldState x0 = out.normalize(truth.frames[init_index]);
  ad::NoGradGuard guard;
  const FnoModel model(ckpt.params, false);
  const auto trace = rollout(model.tendency(truth.mask), x0, steps, truth.lead_days);
  for (const auto& z : trace.states) out.frames.push_back(out.denormalize(z));
  out.n_train = out.frames.size();
  return {init_index, std::move(out)};
}

void write_forecast(const std::filesystem::path& path, const Forecast& f) {
  write_dataset(path, f.data);
  nlohmann::json meta{{"kind", "forecast"},
                      {"init_index", f.init_index},
                      {"steps", f.data.frames.size()},
                      {"n_train", f.data.frames.size()},
                      {"lead_days", f.data.lead_days}};
  std::ofstream os(sidecar_path(path), std::ios::trunc);
  if (!os) throw IoError("cannot write " + sidecar_path(path).string());
  os << meta.dump(2) << '\n';
}

Forecast read_forecast(const std::filesystem::path& path) {
  Forecast f;
  f.data = read_dataset(path);
  const auto meta = sidecar_path(path);
  std::ifstream ms(meta);
  if (!ms) throw IoError(path.string() + ": forecast sidecar " + meta.string() + " missing");
  const auto j = nlohmann::json::parse(ms, nullptr, false);
  if (!j.is_object() || !j.contains("init_index") || !j["init_index"].is_number_unsigned()) {
    throw IoError(meta.string() + ": no init_index");
  }
  f.init_index = j["init_index"].get<std::size_t>();
  return f;
}

EvalReport evaluate(const OceanDataset& truth, std::span<const Forecast> forecasts,
                    const EvalOptions& opts) {
  if (forecasts.empty()) throw ConfigError("evaluate: no forecasts given");
  const std::size_t steps = forecasts[0].data.frames.size();
  for (const auto& f : forecasts) {
    if (!(f.data.mask == truth.mask)) throw DimensionError("evaluate: forecast grid or mask differs from truth");
    if (f.data.frames.size() != steps) throw ConfigError("evaluate: forecasts differ in length");
    if (f.data.lead_days != truth.lead_days) throw ConfigError("evaluate: lead intervals differ");
    if (f.init_index + steps >= truth.n_time()) {
      throw ConfigError("evaluate: forecast from index " + std::to_string(f.init_index) + " with " +
                        std::to_string(steps) + " steps runs past the truth (" +
                        std::to_string(truth.n_time()) + " frames)");
    }
  }
  const std::span<const FieldState> train_frames(truth.frames.data(), truth.n_train);
  EvalReport report;
  report.n_inits = forecasts.size();
  report.level = opts.level ? *opts.level : ocean_quantile(train_frames, 0.85);

  std::vector<LeadAccumulators> model(steps + 1), persist(steps + 1);
  for (const auto& f : forecasts) {
    const FieldState& x0 = truth.frames[f.init_index];
    for (std::size_t k = 0; k <= steps; ++k) {
      const FieldState& target = truth.frames[f.init_index + k];
      const FieldState& pred = k == 0 ? x0 : f.data.frames[k - 1];
      model[k].add(pred, target, report.level, opts.km_per_cell);
      persist[k].add(x0, target, report.level, opts.km_per_cell);
    }
  }
  for (std::size_t k = 0; k <= steps; ++k) {
    report.rows.push_back({k, model[k].rmse.stats(), model[k].cc.stats(), model[k].mhd.stats(),
                           persist[k].rmse.stats(), persist[k].cc.stats(), persist[k].mhd.stats()});
  }

  SaturationOptions sat;
  sat.n_pairs = opts.sat_pairs;
  sat.factor = opts.sat_factor;
  sat.seed = opts.seed;
  sat.level = report.level;
  sat.km_per_cell = opts.km_per_cell;
  report.rmse_sat = saturation(Metric::Rmse, train_frames, sat);
  report.cc_sat = saturation(Metric::Cc, train_frames, sat);
  report.mhd_sat = saturation(Metric::Mhd, train_frames, sat);
  return report;
}

void write_report(const std::filesystem::path& path, const EvalReport& report) {
  write_rows(path, report, false);
  auto std_path = path;
  std_path.replace_filename(path.stem().string() + "_std.csv");
  write_rows(std_path, report, true);
  const auto sat_path = path.parent_path() / "saturation.csv";
  std::ofstream os(sat_path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + sat_path.string());
  os << std::setprecision(17) << "rmse_sat,cc_sat,mhd_sat\n"
     << report.rmse_sat << ',' << report.cc_sat << ',' << report.mhd_sat << '\n';
}

}  // namespace oceannet

#include "oceannet/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "oceannet/checkpoint.hpp"
#include "oceannet/config.hpp"
#include "oceannet/dataset.hpp"
#include "oceannet/errors.hpp"
#include "oceannet/evaluate.hpp"
#include "oceannet/spectral.hpp"
#include "oceannet/train.hpp"

namespace oceannet::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " path is required");
  if (!fs::exists(path)) throw ConfigError(std::string(what) + " not found: " + path);
}

struct GenArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  bool print = false;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  GenConfig cfg;
  if (!a.config.empty()) cfg = gen_config_from_json(load_json(a.config));
  if (a.seed) cfg.seed = *a.seed;
  if (a.print) {
    out << to_json(cfg).dump(2) << '\n';
    return kOk;
  }
  if (a.out.empty()) throw ConfigError("gen: --out is required");
  const OceanDataset ds = gen_dataset(cfg);
  write_dataset(a.out, ds);
  const json cj = to_json(cfg);
  const json meta{{"kind", "dataset"},     {"n_train", cfg.n_train}, {"n_test", cfg.n_test},
                  {"seed", cfg.seed},      {"config", cj},           {"config_hash", hex64(fnv1a(cj.dump()))}};
  std::ofstream ms(sidecar_path(a.out), std::ios::trunc);
  if (!ms) throw IoError("cannot write " + sidecar_path(a.out).string());
  ms << meta.dump(2) << '\n';
  out << "wrote " << a.out << ": " << ds.n_time() << " frames (" << ds.n_train << " train), "
      << ds.height() << "x" << ds.width() << ", ocean fraction " << std::setprecision(4)
      << ds.mask.ocean_fraction() << ", lead " << ds.lead_days << " days\n";
  return kOk;
}

struct TrainArgs {
  std::string config, data, ckpt;
  std::optional<std::uint64_t> seed;
  bool print = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainConfig cfg;
  bool cutoff_given = false;
  if (!a.config.empty()) {
    const json j = load_json(a.config);
    cfg = train_config_from_json(j);
    cutoff_given = j.contains("loss") && j["loss"].contains("cutoff_k");
  }
  if (!a.data.empty()) cfg.data = a.data;
  if (!a.ckpt.empty()) cfg.ckpt_dir = a.ckpt;
  if (a.seed) cfg.seed = *a.seed;
  if (a.print) {
    out << to_json(cfg).dump(2) << '\n';
    return kOk;
  }
  require_file(cfg.data, "dataset");
  if (cfg.ckpt_dir.empty()) throw ConfigError("train: checkpoint directory (--ckpt) is required");
  const OceanDataset ds = read_dataset(cfg.data);
  resolve_grid(cfg, ds.height(), ds.width(), cutoff_given);
  const auto result = train(ds, cfg, [&](const EpochLog& e) {
    err << "epoch " << e.epoch << ": train " << e.train_loss << ", val " << e.val_loss << '\n';
  });
  out << "trained " << result.log.size() << " epochs; best val_loss "
      << std::min_element(result.log.begin(), result.log.end(),
                          [](const EpochLog& x, const EpochLog& y) { return x.val_loss < y.val_loss; })
             ->val_loss
      << "; checkpoints in " << cfg.ckpt_dir << '\n';
  return kOk;
}

struct ForecastArgs {
  std::string ckpt, data, out;
  std::size_t init_index = 0, steps = 0;
};

int cmd_forecast(const ForecastArgs& a, std::ostream& out) {
  require_file(a.ckpt, "checkpoint");
  require_file(a.data, "dataset");
  if (a.out.empty()) throw ConfigError("forecast: --out is required");
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  const OceanDataset truth = read_dataset(a.data);
  const Forecast f = make_forecast(ckpt, truth, a.init_index, a.steps);
  write_forecast(a.out, f);
  out << "wrote " << a.out << ": " << f.data.frames.size() << " frames from index " << a.init_index
      << " (" << f.data.frames.size() * truth.lead_days << " days)\n";
  return kOk;
}

struct EvalArgs {
  std::string data, out;
  std::vector<std::string> forecasts;
  std::optional<double> level;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  require_file(a.data, "truth dataset");
  if (a.forecasts.empty()) throw ConfigError("eval: at least one forecast file is required");
  if (a.out.empty()) throw ConfigError("eval: --out is required");
  const OceanDataset truth = read_dataset(a.data);
  std::vector<Forecast> forecasts;
  for (const auto& p : a.forecasts) {
    require_file(p, "forecast");
    forecasts.push_back(read_forecast(p));
  }
  EvalOptions opts;
  opts.level = a.level;
  opts.seed = a.seed;
  const EvalReport report = evaluate(truth, forecasts, opts);
  write_report(a.out, report);
  out << "wrote " << a.out << ": " << report.rows.size() << " lead steps over " << report.n_inits
      << " initialization(s), contour level " << report.level << '\n';
  return kOk;
}

struct SpectrumArgs {
  std::string data, out;
  std::size_t frame = 0;
};

int cmd_spectrum(const SpectrumArgs& a, std::ostream& out) {
  require_file(a.data, "dataset");
  const OceanDataset ds = read_dataset(a.data);
  if (a.frame >= ds.n_time()) {
    throw ConfigError("frame " + std::to_string(a.frame) + " out of range (" +
                      std::to_string(ds.n_time()) + " frames)");
  }
  FieldState f = ds.frames[a.frame];
  double mean = 0.0;
  auto v = f.values.real();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (f.mask.ocean(i)) mean += v[i];
  mean /= static_cast<double>(std::max<std::size_t>(f.mask.ocean_count(), 1));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.mask.ocean(i) ? v[i] - mean : kLandFill;
  const SpectrumProfile s = zonal_spectrum(f.values);

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::trunc);
    if (!file) throw IoError("cannot write " + a.out);
  }
  std::ostream& os = a.out.empty() ? out : file;
  os << "k,amplitude\n" << std::setprecision(17);
  for (std::size_t k = 0; k < s.values.size(); ++k) os << k << ',' << s.values[k] << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned SSH forecasting with a Fourier neural operator", "oceannet"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic SSH dataset");
  g->add_option("--config", gen.config, "JSON generator config");
  g->add_option("--out", gen.out, "Dataset file to write");
  g->add_option("--seed", gen.seed, "Override the config seed");
  g->add_flag("--print-config", gen.print, "Print the effective config and exit");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the operator on a dataset");
  t->add_option("--config", tr.config, "JSON training config");
  t->add_option("--data", tr.data, "Dataset file (overrides config)");
  t->add_option("--ckpt", tr.ckpt, "Checkpoint directory (overrides config)");
  t->add_option("--seed", tr.seed, "Override the config seed");
  t->add_flag("--print-config", tr.print, "Print the effective config and exit");

  ForecastArgs fc;
  auto* f = app.add_subcommand("forecast", "Roll a trained model forward from a dataset frame");
  f->add_option("--ckpt", fc.ckpt, "Checkpoint file")->required();
  f->add_option("--data", fc.data, "Dataset holding the initial frame")->required();
  f->add_option("--init-index", fc.init_index, "Initial frame index");
  f->add_option("--steps", fc.steps, "Number of lead intervals");
  f->add_option("--out", fc.out, "Forecast file to write")->required();

  EvalArgs ev;
  std::vector<std::string> positional;
  auto* e = app.add_subcommand("eval", "Score forecasts against the truth and persistence");
  e->add_option("--data", ev.data, "Truth dataset")->required();
  e->add_option("--forecast", ev.forecasts, "Forecast file (repeatable)");
  e->add_option("forecasts", positional, "Forecast files");
  e->add_option("--level", ev.level, "SSH contour level for MHD (default: 85th percentile)");
  e->add_option("--seed", ev.seed, "Seed for saturation pairs");
  e->add_option("--out", ev.out, "Report CSV to write")->required();

  SpectrumArgs sp;
  auto* s = app.add_subcommand("spectrum", "Export the zonal spectrum of one frame");
  s->add_option("--data", sp.data, "Dataset or forecast file")->required();
  s->add_option("--frame", sp.frame, "Frame index");
  s->add_option("--out", sp.out, "CSV file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    return app.exit(pe, out, err) == 0 ? kOk : kConfig;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (t->parsed()) return cmd_train(tr, out, err);
    if (f->parsed()) return cmd_forecast(fc, out);
    if (e->parsed()) {
      ev.forecasts.insert(ev.forecasts.end(), positional.begin(), positional.end());
      return cmd_eval(ev, out);
    }
    if (s->parsed()) return cmd_spectrum(sp, out);
  } catch (const ConfigError& ce) {
    err << "oceannet: configuration error: " << ce.what() << '\n';
    return kConfig;
  } catch (const UsageError& ue) {
    err << "oceannet: usage error: " << ue.what() << '\n';
    return kConfig;
  } catch (const std::exception& ex) {
    err << "oceannet: " << ex.what() << '\n';
    return kRuntime;
  }
  return kConfig;
}

}  // namespace oceannet::cli

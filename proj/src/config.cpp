#include "oceannet/config.hpp"

#include <fstream>
#include <set>

#include "oceannet/errors.hpp"

namespace oceannet {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
  if constexpr (std::is_arithmetic_v<T> && !std::is_same_v<T, bool>) {
    if (std::is_unsigned_v<T> && j.at(key).is_number_integer() && j.at(key).get<long long>() < 0) {
      throw ConfigError(std::string("config key '") + key + "' must be non-negative");
    }
  }
}

}  // namespace

json to_json(const GenConfig& c) {
  return {{"height", c.height},
          {"width", c.width},
          {"mode", c.mode == GenMode::Qg ? "qg" : "analytic"},
          {"seed", c.seed},
          {"n_train", c.n_train},
          {"n_test", c.n_test},
          {"lead_days", c.lead_days},
          {"dt_days", c.dt_days},
          {"spinup_days", c.spinup_days},
          {"mask", c.mask},
          {"storage", c.storage == StorageType::F32 ? "f32" : "f64"},
          {"hyperviscosity", c.hyperviscosity},
          {"drag", c.drag},
          {"beta", c.beta},
          {"forcing_amplitude", c.forcing_amplitude},
          {"forcing_k_min", c.forcing_k_min},
          {"forcing_k_max", c.forcing_k_max},
          {"forcing_tau", c.forcing_tau},
          {"init_rms", c.init_rms},
          {"init_k_peak", c.init_k_peak},
          {"ssh_scale", c.ssh_scale},
          {"n_eddies", c.n_eddies},
          {"eddy_amplitude", c.eddy_amplitude},
          {"eddy_radius", c.eddy_radius},
          {"eddy_drift", c.eddy_drift},
          {"eddy_drift_spread", c.eddy_drift_spread}};
}

GenConfig gen_config_from_json(const json& j) {
  GenConfig c;
  const json defaults = to_json(c);
  std::set<std::string> known;
  for (const auto& [key, _] : defaults.items()) known.insert(key);
  reject_unknown(j, known, "gen config");
  read(j, "height", c.height);
  read(j, "width", c.width);
  std::string mode = "qg", storage = "f64";
  read(j, "mode", mode);
  if (mode != "qg" && mode != "analytic") throw ConfigError("gen config: mode must be 'qg' or 'analytic'");
  c.mode = mode == "qg" ? GenMode::Qg : GenMode::Analytic;
  read(j, "storage", storage);
  if (storage != "f32" && storage != "f64") throw ConfigError("gen config: storage must be 'f32' or 'f64'");
  c.storage = storage == "f32" ? StorageType::F32 : StorageType::F64;
  read(j, "seed", c.seed);
  read(j, "n_train", c.n_train);
  read(j, "n_test", c.n_test);
  read(j, "lead_days", c.lead_days);
  read(j, "dt_days", c.dt_days);
  read(j, "spinup_days", c.spinup_days);
  read(j, "mask", c.mask);
  read(j, "hyperviscosity", c.hyperviscosity);
  read(j, "drag", c.drag);
  read(j, "beta", c.beta);
  read(j, "forcing_amplitude", c.forcing_amplitude);
  read(j, "forcing_k_min", c.forcing_k_min);
  read(j, "forcing_k_max", c.forcing_k_max);
  read(j, "forcing_tau", c.forcing_tau);
  read(j, "init_rms", c.init_rms);
  read(j, "init_k_peak", c.init_k_peak);
  read(j, "ssh_scale", c.ssh_scale);
  read(j, "n_eddies", c.n_eddies);
  read(j, "eddy_amplitude", c.eddy_amplitude);
  read(j, "eddy_radius", c.eddy_radius);
  read(j, "eddy_drift", c.eddy_drift);
  read(j, "eddy_drift_spread", c.eddy_drift_spread);
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"data", c.data},
          {"ckpt_dir", c.ckpt_dir},
          {"model",
           {{"width", c.fno.width},
            {"n_layers", c.fno.n_layers},
            {"modes_x", c.fno.modes.kmax_x},
            {"modes_y", c.fno.modes.kmax_y}}},
          {"loss",
           {{"cutoff_k", c.loss.cutoff_k},
            {"reg_weight", c.loss.reg_weight},
            {"penalty", c.loss.penalty == PenaltyMode::Magnitude ? "magnitude" : "complex"}}},
          {"lr", c.lr},
          {"lr_min", c.lr_min},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"val_fraction", c.val_fraction},
          {"max_samples", c.max_samples},
          {"threads", c.threads}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  reject_unknown(j,
                 {"data", "ckpt_dir", "model", "loss", "lr", "lr_min", "batch_size", "epochs", "seed",
                  "val_fraction", "max_samples", "threads"},
                 "train config");
  read(j, "data", c.data);
  read(j, "ckpt_dir", c.ckpt_dir);
  if (j.contains("model")) {
    const auto& m = j["model"];
    reject_unknown(m, {"width", "n_layers", "modes_x", "modes_y"}, "train config model");
    read(m, "width", c.fno.width);
    read(m, "n_layers", c.fno.n_layers);
    read(m, "modes_x", c.fno.modes.kmax_x);
    read(m, "modes_y", c.fno.modes.kmax_y);
  }
  if (j.contains("loss")) {
    const auto& l = j["loss"];
    reject_unknown(l, {"cutoff_k", "reg_weight", "penalty"}, "train config loss");
    read(l, "cutoff_k", c.loss.cutoff_k);
    read(l, "reg_weight", c.loss.reg_weight);
    std::string penalty = "magnitude";
    read(l, "penalty", penalty);
    if (penalty != "magnitude" && penalty != "complex") {
      throw ConfigError("train config: loss.penalty must be 'magnitude' or 'complex'");
    }
    c.loss.penalty = penalty == "magnitude" ? PenaltyMode::Magnitude : PenaltyMode::ComplexDifference;
  }
  read(j, "lr", c.lr);
  read(j, "lr_min", c.lr_min);
  read(j, "batch_size", c.batch_size);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
  read(j, "val_fraction", c.val_fraction);
  read(j, "max_samples", c.max_samples);
  read(j, "threads", c.threads);
  return c;
}

void resolve_grid(TrainConfig& cfg, std::size_t height, std::size_t width, bool cutoff_given) {
  cfg.fno.grid_h = height;
  cfg.fno.grid_w = width;
  if (!cutoff_given) cfg.loss.cutoff_k = width / 4;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not readable: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace oceannet

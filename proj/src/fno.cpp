#include "oceannet/fno.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include "oceannet/errors.hpp"
#include "oceannet/fft.hpp"
#include "oceannet/ops.hpp"
#include "oceannet/random.hpp"

namespace oceannet {

namespace {

struct TensorSpec {
  std::string name;
  Shape shape;
  DType dtype;
};

std::vector<TensorSpec> layout(const FnoConfig& c) {
  const std::size_t w = c.width;
  const std::size_t rows = retained_rows(c.grid_h, c.modes.kmax_y).size();
  const std::size_t cols = retained_cols(c.grid_w, c.modes.kmax_x);
  std::vector<TensorSpec> specs{
      {"lift.0.weight", {w, c.in_channels}, DType::Real64},
      {"lift.0.bias", {w}, DType::Real64},
      {"lift.1.weight", {w, w}, DType::Real64},
      {"lift.1.bias", {w}, DType::Real64},
  };
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    specs.push_back({p + "spectral", {w, w, rows, cols}, DType::Complex128});
    specs.push_back({p + "weight", {w, w}, DType::Real64});
    specs.push_back({p + "bias", {w}, DType::Real64});
  }
  specs.push_back({"bias_field", {w, c.grid_h, c.grid_w}, DType::Real64});
  specs.push_back({"proj.0.weight", {w, w}, DType::Real64});
  specs.push_back({"proj.0.bias", {w}, DType::Real64});
  specs.push_back({"proj.1.weight", {c.out_channels, w}, DType::Real64});
  specs.push_back({"proj.1.bias", {c.out_channels}, DType::Real64});
  return specs;
}

}  // namespace

void FnoConfig::validate() const {
  if (width < 1) throw ConfigError("FnoConfig: width must be >= 1");
  if (n_layers < 1) throw ConfigError("FnoConfig: n_layers must be >= 1");
  if (in_channels != 2 || out_channels != 1) {
    throw ConfigError("FnoConfig: the operator maps (field, mask) to one tendency channel");
  }
  fft::require_pow2(grid_h, "grid height");
  fft::require_pow2(grid_w, "grid width");
  modes.validate(grid_h, grid_w);
}

Tensor& FnoParams::at(std::string_view name) {
  for (auto& t : tensors)
    if (t.name == name) return t.value;
  throw UsageError("FnoParams: no tensor named " + std::string(name));
}

const Tensor& FnoParams::at(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw UsageError("FnoParams: no tensor named " + std::string(name));
}

std::size_t FnoParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.value.raw().size();
  return n;
}

bool FnoParams::identical(const FnoParams& other) const {
  if (!(config == other.config) || tensors.size() != other.tensors.size()) return false;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].name != other.tensors[i].name ||
        !tensors[i].value.identical(other.tensors[i].value))
      return false;
  }
  return true;
}

std::size_t param_count(const FnoConfig& cfg) {
  cfg.validate();
  std::size_t n = 0;
  for (const auto& s : layout(cfg)) {
    n += shape_numel(s.shape) * (s.dtype == DType::Complex128 ? 2 : 1);
  }
  return n;
}

FnoParams zero_params(const FnoConfig& cfg) {
  cfg.validate();
  FnoParams p{cfg, {}};
  for (auto& s : layout(cfg)) p.tensors.push_back({s.name, Tensor(s.shape, s.dtype)});
  return p;
}

FnoParams init_params(const FnoConfig& cfg, std::uint64_t seed) {
  FnoParams p = zero_params(cfg);
  std::mt19937_64 rng(seed);
  const double spectral_scale = 1.0 / static_cast<double>(cfg.width * cfg.width);
  for (auto& t : p.tensors) {
    if (t.name == "bias_field") continue;
    if (t.value.is_complex()) {
      for (double& v : t.value.raw()) v = spectral_scale * uniform01(rng);
      continue;
    }
    // Biases share the fan-in of the weight they follow.
    const bool is_weight = t.value.rank() == 2;
    const std::size_t fan_in =
        is_weight ? t.value.dim(1) : p.at(t.name.substr(0, t.name.size() - 4) + "weight").dim(1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.value.raw()) v = bound * (2.0 * uniform01(rng) - 1.0);
  }
  return p;
}

FnoModel::FnoModel(const FnoParams& params, bool differentiable) : config_(params.config) {
  config_.validate();
  auto expected = layout(config_);
  if (expected.size() != params.tensors.size()) {
    throw DimensionError("FnoModel: parameter set does not match config");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& t = params.tensors[i];
    if (t.name != expected[i].name || t.value.shape() != expected[i].shape ||
        t.value.dtype() != expected[i].dtype) {
      throw DimensionError("FnoModel: tensor " + t.name + " " + shape_str(t.value.shape()) +
                           " does not match expected " + expected[i].name + " " +
                           shape_str(expected[i].shape));
    }
    leaves_.push_back(differentiable ? ad::Var::parameter(t.name, t.value) : ad::Var(t.value));
  }
  std::size_t k = 0;
  lift_w0_ = leaves_[k++];
  lift_b0_ = leaves_[k++];
  lift_w1_ = leaves_[k++];
  lift_b1_ = leaves_[k++];
  for (std::size_t l = 0; l < config_.n_layers; ++l) {
    Layer layer;
    layer.spectral = leaves_[k++];
    layer.weight = leaves_[k++];
    layer.bias = leaves_[k++];
    layers_.push_back(layer);
  }
  bias_field_ = leaves_[k++];
  proj_w0_ = leaves_[k++];
  proj_b0_ = leaves_[k++];
  proj_w1_ = leaves_[k++];
  proj_b1_ = leaves_[k++];
}

void FnoModel::assign(const FnoParams& params) {
  if (!(params.config == config_) || params.tensors.size() != leaves_.size()) {
    throw DimensionError("FnoModel::assign: parameter set does not match model");
  }
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    auto src = params.tensors[i].value.raw();
    auto dst = leaves_[i].node()->value.raw();
    std::memcpy(dst.data(), src.data(), src.size() * sizeof(double));
  }
}

Tendency FnoModel::tendency(const Mask& mask) const {
  return [this, mask](const ad::Var& x) { return (*this)(x, mask); };
}

ad::Var fourier_layer_linear(const ad::Var& h, const ad::Var& spectral, const ad::Var& weight,
                             const ad::Var& bias, const ModeWindow& modes) {
  return ad::add(ad::channel_mix(h, weight, bias), ad::spectral_conv(h, spectral, modes));
}

ad::Var FnoModel::operator()(const ad::Var& field, const Mask& mask) const {
  const std::size_t h = config_.grid_h, w = config_.grid_w;
  if (field.shape() != Shape{h, w} || mask.height() != h || mask.width() != w) {
    throw DimensionError("FnoModel: field " + shape_str(field.shape()) + " on a " +
                         std::to_string(h) + "x" + std::to_string(w) + " model");
  }
  const ad::Var inputs[] = {ad::reshape(field, {1, h, w}),
                            ad::Var(mask.as_tensor().reshaped({1, h, w}))};
  ad::Var y = ad::concat_channels(inputs);
  y = ad::gelu(ad::channel_mix(y, lift_w0_, lift_b0_));
  y = ad::channel_mix(y, lift_w1_, lift_b1_);
  for (const auto& layer : layers_) {
    y = ad::gelu(fourier_layer_linear(y, layer.spectral, layer.weight, layer.bias, config_.modes));
  }
  y = ad::add(y, bias_field_);
  y = ad::gelu(ad::channel_mix(y, proj_w0_, proj_b0_));
  y = ad::channel_mix(y, proj_w1_, proj_b1_);
  return ad::reshape(y, {h, w});
}

Tensor forward(const FnoParams& params, const FieldState& x) {
  ad::NoGradGuard guard;
  const FnoModel model(params, false);
  const ad::Var out = model(ad::Var(x.values), x.mask);
  return out.value().reshaped({1, x.height(), x.width()});
}

}  // namespace oceannet

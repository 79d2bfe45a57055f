#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oceannet/autodiff.hpp"
#include "oceannet/field.hpp"
#include "oceannet/pec.hpp"
#include "oceannet/spectral.hpp"

namespace oceannet {

struct FnoConfig {
  std::size_t width = 32;  // hidden channels
  std::size_t n_layers = 4;
  ModeWindow modes{16, 16};
  std::size_t in_channels = 2;  // field + mask
  std::size_t out_channels = 1;
  std::size_t grid_h = 64;
  std::size_t grid_w = 64;

  void validate() const;
  bool operator==(const FnoConfig&) const = default;
};

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Trainable tensors of the operator in canonical order:
///   lift.{0,1}.{weight,bias}, layers.{l}.{spectral,weight,bias},
///   bias_field, proj.{0,1}.{weight,bias}
/// Spectral weights are complex [width, width, n_rows, n_cols] over the
/// retained (k_y, k_x >= 0) modes.
struct FnoParams {
  FnoConfig config;
  std::vector<NamedTensor> tensors;

  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  /// Total real scalars (complex entries count twice).
  std::size_t scalar_count() const;
  bool identical(const FnoParams& other) const;
};

/// Exact parameter count implied by the config.
std::size_t param_count(const FnoConfig& cfg);

/// Deterministic initialization: channel mixes ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// spectral weights (re, im) ~ U(0, 1) / width^2, bias field zero.
FnoParams init_params(const FnoConfig& cfg, std::uint64_t seed);

/// Parameters with every tensor zero (the operator is then identically zero).
FnoParams zero_params(const FnoConfig& cfg);

/// Parameters bound as graph leaves for one differentiation pass. Create one
/// per thread; leaves accumulate gradients from every graph built on them.
class FnoModel {
 public:
  /// `differentiable` = false binds constants (inference).
  FnoModel(const FnoParams& params, bool differentiable);

  /// Tendency for a standardized field [H,W] given the ocean mask; returns [H,W].
  ad::Var operator()(const ad::Var& field, const Mask& mask) const;

  std::span<const ad::Var> leaves() const { return leaves_; }
  /// Overwrite leaf values in place with same-shaped parameters.
  void assign(const FnoParams& params);
  /// The operator as a Tendency on fields over `mask`.
  Tendency tendency(const Mask& mask) const;
  const FnoConfig& config() const { return config_; }

 private:
  struct Layer {
    ad::Var spectral, weight, bias;
  };
  FnoConfig config_;
  std::vector<ad::Var> leaves_;
  ad::Var lift_w0_, lift_b0_, lift_w1_, lift_b1_;
  std::vector<Layer> layers_;
  ad::Var bias_field_;
  ad::Var proj_w0_, proj_b0_, proj_w1_, proj_b1_;
};

/// One Fourier layer before its activation: W h + b + spectral_conv(h).
ad::Var fourier_layer_linear(const ad::Var& h, const ad::Var& spectral, const ad::Var& weight,
                             const ad::Var& bias, const ModeWindow& modes);

/// Inference forward pass: standardized field -> tendency, shape [1,H,W].
Tensor forward(const FnoParams& params, const FieldState& x);

}  // namespace oceannet

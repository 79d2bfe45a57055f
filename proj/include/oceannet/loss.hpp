#pragma once

#include <cstddef>

#include "oceannet/autodiff.hpp"
#include "oceannet/field.hpp"
#include "oceannet/pec.hpp"

namespace oceannet {

/// How the spectral regularizer compares two fields.
enum class PenaltyMode {
  /// Differences of latitude-averaged magnitude spectra (default).
  Magnitude,
  /// Squared modulus of the difference of latitude-averaged complex transforms.
  ComplexDifference,
};

struct LossConfig {
  std::size_t cutoff_k = 16;  // k_T; the full-resolution reference value is 100
  double reg_weight = 1e-3;   // lambda
  PenaltyMode penalty = PenaltyMode::Magnitude;

  /// Default cutoff for a grid of width W is W/4.
  static LossConfig for_width(std::size_t width) { return {width / 4, 1e-3, PenaltyMode::Magnitude}; }
  void validate(std::size_t width) const;
};

/// Mean squared difference over ocean pixels. Throws ConfigError for an
/// all-land mask.
ad::Var masked_mse(const ad::Var& pred, const ad::Var& target, const Mask& mask);
double masked_mse(const FieldState& pred, const FieldState& target);

/// mu = sum_{k_x >= k_T} (S_pred(k_x) - S_target(k_x))^2 over the zonal
/// spectra. An empty band (k_T > W/2) gives 0.
ad::Var spectral_penalty(const ad::Var& pred, const ad::Var& target, std::size_t cutoff_k,
                         PenaltyMode mode = PenaltyMode::Magnitude);

struct LossTerms {
  ad::Var total;
  double mse1 = 0, mse2 = 0;  // ocean MSE at one and two lead intervals
  double mu1 = 0, mu2 = 0;    // spectral penalties at one and two lead intervals
};

/// Two-step objective: one rollout x -> z1 -> z2 (land re-masked), scored
/// against y1 and y2 with masked MSE plus reg_weight * spectral penalty.
LossTerms total_loss(const Tendency& n, const ad::Var& x, const Tensor& y1, const Tensor& y2,
                     const Mask& mask, const LossConfig& cfg);

}  // namespace oceannet

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace oceannet {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over a flat vector of real parameters (complex entries appear as
/// their interleaved real and imaginary parts).
class Adam {
 public:
  explicit Adam(std::size_t n, AdamConfig cfg = {});

  /// params -= lr * mhat / (sqrt(vhat) + eps) with bias-corrected moments.
  void step(std::span<double> params, std::span<const double> grad, double lr);

  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

/// lr_min + (lr_max - lr_min) * (1 + cos(pi * step / total)) / 2, clamped at total.
double cosine_lr(double lr_max, double lr_min, std::size_t step, std::size_t total);

}  // namespace oceannet

#include "oceannet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "oceannet/errors.hpp"

namespace oceannet {

Adam::Adam(std::size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0 && cfg.eps > 0.0)) {
    throw ConfigError("Adam: betas must lie in [0,1) and eps be positive");
  }
}

void Adam::step(std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw DimensionError("Adam: expected " + std::to_string(m_.size()) + " values, got " +
                         std::to_string(params.size()) + " params and " +
                         std::to_string(grad.size()) + " grads");
  }
  ++t_;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.eps);
  }
}

double cosine_lr(double lr_max, double lr_min, std::size_t step, std::size_t total) {
  if (total == 0) return lr_max;
  const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(total));
  return lr_min + (lr_max - lr_min) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace oceannet

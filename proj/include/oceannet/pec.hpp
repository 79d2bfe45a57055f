#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "oceannet/autodiff.hpp"
#include "oceannet/errors.hpp"
#include "oceannet/field.hpp"

namespace oceannet {

/// Learned tendency over one lead interval, N[x]. Must be deterministic.
using Tendency = std::function<ad::Var(const ad::Var&)>;

/// Predictor-evaluate-corrector step: i1 = N(x); z = x + N(x + i1/2).
ad::Var pec_step(const Tendency& n, const ad::Var& x);

/// pec_step followed by resetting land pixels to kLandFill.
ad::Var advance(const Tendency& n, const ad::Var& x, const Mask& mask);

/// Non-differentiable pec_step on a field (no land re-masking).
FieldState pec_step(const Tendency& n, const FieldState& x);

struct RolloutTrace {
  std::vector<FieldState> states;  // z_1 .. z_n
  double lead_interval_days = 0.0;
};

/// Raised when a rollout produces non-finite values.
class RolloutError : public NumericError {
 public:
  RolloutError(std::size_t step, const std::string& what);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// z_k = advance(N, z_{k-1}), z_0 = x0; returns z_1..z_n.
RolloutTrace rollout(const Tendency& n, const FieldState& x0, std::size_t steps,
                     double lead_interval_days = 0.0);

}  // namespace oceannet

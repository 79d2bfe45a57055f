#include "oceannet/pec.hpp"

#include "oceannet/ops.hpp"

namespace oceannet {

ad::Var pec_step(const Tendency& n, const ad::Var& x) {
  const ad::Var i1 = n(x);
  return ad::add(x, n(ad::add(x, ad::scale(i1, 0.5))));
}

ad::Var advance(const Tendency& n, const ad::Var& x, const Mask& mask) {
  return ad::apply_mask(pec_step(n, x), mask.as_tensor(), kLandFill);
}

FieldState pec_step(const Tendency& n, const FieldState& x) {
  ad::NoGradGuard guard;
  return {pec_step(n, ad::Var(x.values)).value(), x.mask};
}

RolloutError::RolloutError(std::size_t step, const std::string& what)
    : NumericError("rollout aborted at step " + std::to_string(step) + ": " + what), step_(step) {}

RolloutTrace rollout(const Tendency& n, const FieldState& x0, std::size_t steps,
                     double lead_interval_days) {
  ad::NoGradGuard guard;
  RolloutTrace trace;
  trace.lead_interval_days = lead_interval_days;
  trace.states.reserve(steps);
  Tensor current = x0.values;
  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      current = advance(n, ad::Var(current), x0.mask).value();
    } catch (const NumericError& e) {
      throw RolloutError(k, e.what());
    }
    trace.states.push_back({current, x0.mask});
  }
  return trace;
}

}  // namespace oceannet

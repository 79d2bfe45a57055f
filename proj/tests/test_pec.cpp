#include <gtest/gtest.h>

#include "oceannet/dataset.hpp"
#include "oceannet/ops.hpp"
#include "oceannet/pec.hpp"
#include "oracles.hpp"

namespace oceannet {
namespace {

Tendency linear(double lambda) {
  return [lambda](const ad::Var& v) { return ad::scale(v, lambda); };
}

class LinearGrowth : public ::testing::TestWithParam<double> {};

TEST_P(LinearGrowth, MatchesSecondOrderTaylorFactor) {
  const double lambda = GetParam();
  const FieldState x{testing::random_real({8, 8}, 3), Mask::all_ocean(8, 8)};
  const FieldState z = pec_step(linear(lambda), x);
  const double growth = 1.0 + lambda + 0.5 * lambda * lambda;
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(z.values.raw()[i], growth * x.values.raw()[i], 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Rates, LinearGrowth, ::testing::Values(-0.1, 0.01, 0.5, -1.0, 2.0));

TEST(Pec, NonlinearStepMatchesHandComputation) {
  // N(x) = x^2 elementwise: z = x + (x + x^2/2)^2.
  const Tendency square = [](const ad::Var& v) { return ad::mul(v, v); };
  const FieldState x{Tensor::from({1, 3}, {0.5, -1.0, 2.0}), Mask::all_ocean(1, 3)};
  const FieldState z = pec_step(square, x);
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = x.values.raw()[i], mid = v + 0.5 * v * v;
    EXPECT_DOUBLE_EQ(z.values.raw()[i], v + mid * mid);
  }
}

TEST(Pec, AdvanceResetsLand) {
  const Mask mask = make_mask("gulf", 16, 16);
  const FieldState x = FieldState{testing::random_real({16, 16}, 4), mask}.masked();
  const Tendency bump = [](const ad::Var& v) { return ad::add(v, ad::Var(Tensor::full(v.shape(), 1.0))); };
  ad::NoGradGuard guard;
  const Tensor z = advance(bump, ad::Var(x.values), mask).value();
  for (std::size_t i = 0; i < z.numel(); ++i) {
    if (!mask.ocean(i)) EXPECT_EQ(z.raw()[i], kLandFill);
    else EXPECT_NE(z.raw()[i], x.values.raw()[i]);
  }
}

TEST(Rollout, ZeroTendencyIsExactIdentity) {
  const Mask mask = make_mask("gulf", 16, 16);
  const FieldState x0 = FieldState{testing::random_real({16, 16}, 5), mask}.masked();
  const auto trace = rollout(linear(0.0), x0, 30, 5.0);
  ASSERT_EQ(trace.states.size(), 30u);
  EXPECT_EQ(trace.lead_interval_days, 5.0);
  for (const auto& s : trace.states) EXPECT_TRUE(s.values.identical(x0.values));
}

TEST(Rollout, StatesAreSuccessiveSteps) {
  const FieldState x0{testing::random_real({4, 4}, 6), Mask::all_ocean(4, 4)};
  const auto trace = rollout(linear(0.1), x0, 3);
  FieldState z = x0;
  for (const auto& s : trace.states) {
    z = pec_step(linear(0.1), z);
    EXPECT_TRUE(s.values.identical(z.values));
  }
}

TEST(Rollout, ReportsStepOfBlowUp) {
  const FieldState x0{Tensor::full({4, 4}, 1.0), Mask::all_ocean(4, 4)};
  // Growth factor 1 + 1e100 + 5e199 per step overflows at the second step.
  try {
    rollout(linear(1e100), x0, 10);
    FAIL() << "expected RolloutError";
  } catch (const RolloutError& e) {
    EXPECT_EQ(e.step(), 2u);
  }
}

TEST(Pec, IsDifferentiable) {
  // d/da of sum(pec_step(a x, x)) with N(v) = a v: (1 + a + a^2/2) sum x -> (1 + a) sum x.
  const Tensor xv = testing::random_real({3, 3}, 7);
  const auto a = ad::Var::parameter("a", Tensor::full({3, 3}, 0.3));
  const Tendency n = [&](const ad::Var& v) { return ad::mul(v, a); };
  const std::vector<ad::Var> params{a};
  const auto g = ad::backward(ad::sum(pec_step(n, ad::Var(xv))), params);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(g.at("a").raw()[i], 1.3 * xv.raw()[i], 1e-14);
}

TEST(Pec, ConstantTendencyAddsOnce) {
  const Tensor c = testing::random_real({4, 4}, 8);
  const Tendency n = [&](const ad::Var&) { return ad::Var(c); };
  const FieldState x{testing::random_real({4, 4}, 9), Mask::all_ocean(4, 4)};
  const FieldState z = pec_step(n, x);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(z.values.raw()[i], x.values.raw()[i] + c.raw()[i]);
}

TEST(Rollout, EmptyAndTwoStepClosedForm) {
  const FieldState x0{testing::random_real({4, 4}, 10), Mask::all_ocean(4, 4)};
  EXPECT_TRUE(rollout(linear(0.3), x0, 0).states.empty());
  const auto trace = rollout(linear(0.3), x0, 2);
  const double g = 1.0 + 0.3 + 0.045;
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(trace.states[1].values.raw()[i], g * g * x0.values.raw()[i], 1e-12);
}

}  // namespace
}  // namespace oceannet

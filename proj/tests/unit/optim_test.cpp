#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "../support/oracles.hpp"
#include "rlw/error.hpp"
#include "rlw/optim.hpp"

using namespace rlw;

namespace {

ObjectiveValue half_square(std::span<const double> p) {
  ObjectiveValue r;
  for (double v : p) {
    r.value += 0.5 * v * v;
    r.gradient.push_back(v);
  }
  return r;
}

ObjectiveValue rosen(std::span<const double> p) {
  ObjectiveValue r;
  r.value = oracle::rosenbrock(p, &r.gradient);
  return r;
}

}  // namespace

TEST(Adam, ZeroGradientIsANoOp) {
  std::vector<double> p{1.0, -2.0, 3.5};
  const auto before = p;
  AdamState s = AdamState::for_size(3, 1e-2);
  adam_step(s, p, std::vector<double>(3, 0.0));
  EXPECT_EQ(p, before);
}

TEST(Adam, ZeroLearningRateIsANoOp) {
  std::vector<double> p{1.0, -2.0, 3.5};
  const auto before = p;
  AdamState s = AdamState::for_size(3, 0.0);
  for (int i = 0; i < 5; ++i) adam_step(s, p, std::vector<double>{0.3, -7.0, 1e4});
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepMovesByTheLearningRate) {
  std::vector<double> p{0.0, 0.0, 0.0};
  AdamState s = AdamState::for_size(3, 1e-3);
  const std::vector<double> g{2.0, -0.5, 40.0};
  adam_step(s, p, g);
  // bias-corrected moments are g and g^2, so the step is lr * g / (|g| + eps)
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(p[i], -1e-3 * g[i] / (std::abs(g[i]) + 1e-8), 1e-18);
  }
}

TEST(Adam, CoordinatewiseUnderPermutation) {
  std::vector<double> a{0.1, 0.2, 0.3}, b{0.3, 0.1, 0.2};
  AdamState sa = AdamState::for_size(3), sb = AdamState::for_size(3);
  for (int k = 0; k < 4; ++k) {
    adam_step(sa, a, std::vector<double>{1.0 * k, -2.0, 0.5});
    adam_step(sb, b, std::vector<double>{0.5, 1.0 * k, -2.0});
  }
  EXPECT_EQ(a[0], b[1]);
  EXPECT_EQ(a[1], b[2]);
  EXPECT_EQ(a[2], b[0]);
}

TEST(Adam, NonFiniteGradientIsReported) {
  std::vector<double> p{1.0, 1.0};
  AdamState s = AdamState::for_size(2);
  EXPECT_THROW(adam_step(s, p, std::vector<double>{0.0, std::numeric_limits<double>::quiet_NaN()}),
               OptimizerError);
}

TEST(Lbfgs, HalfSquareInThreeIterations) {
  std::vector<double> p{1.0};
  LbfgsState s;
  int iters = 0;
  while (std::abs(p[0]) >= 1e-8 && iters < 3) {
    lbfgs_step(s, p, half_square);
    ++iters;
  }
  EXPECT_LT(std::abs(p[0]), 1e-8);
  EXPECT_LE(iters, 3);
}

TEST(Lbfgs, ZeroGradientConvergesWithoutMoving) {
  std::vector<double> p{0.0, 0.0};
  LbfgsState s;
  const auto r = lbfgs_step(s, p, half_square);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(p, (std::vector<double>{0.0, 0.0}));
}

TEST(Lbfgs, RosenbrockWithinOneHundredIterations) {
  std::vector<double> p{-1.2, 1.0};
  LbfgsState s;
  double prev = rosen(p).value;
  int iters = 0;
  for (; iters < 100; ++iters) {
    const auto r = lbfgs_step(s, p, rosen);
    if (r.accepted) {
      EXPECT_LE(r.value, prev);
      prev = r.value;
    }
    if (r.value < 1e-10 || r.converged) break;
  }
  EXPECT_LT(rosen(p).value, 1e-10);
  EXPECT_LT(iters, 100);
}

TEST(Lbfgs, Deterministic) {
  std::vector<double> a{-1.2, 1.0}, b{-1.2, 1.0};
  LbfgsState sa, sb;
  for (int i = 0; i < 20; ++i) {
    lbfgs_step(sa, a, rosen);
    lbfgs_step(sb, b, rosen);
  }
  EXPECT_EQ(a, b);
}

TEST(Lbfgs, StepScaleShortensTheFirstTrial) {
  std::vector<double> p{1.0};
  LbfgsState s;
  s.step_scale = 0.1;
  const auto r = lbfgs_step(s, p, half_square);
  EXPECT_TRUE(r.accepted);
  EXPECT_LT(r.value, 0.5);
}

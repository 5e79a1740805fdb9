#include <gtest/gtest.h>

#include <cmath>

#include "ribcage/adam.hpp"

using namespace ribcage;

TEST(Adam, FirstStepHandValue) {
  std::vector<double> p{1.0}, g{1.0}, m{0.0}, v{0.0};
  OptConfig cfg;
  cfg.weight_decay = 0.0;
  adam_update(p, g, m, v, 1, cfg);
  EXPECT_DOUBLE_EQ(p[0], 1.0 - 0.001 * 1.0 / (1.0 + 1e-8));
  EXPECT_DOUBLE_EQ(m[0], 0.1);
  EXPECT_DOUBLE_EQ(v[0], 0.001);
}

TEST(Adam, ZeroGradientNoDecayLeavesParams) {
  std::vector<double> p{0.3, -2.0}, g{0.0, 0.0}, m{0.0, 0.0}, v{0.0, 0.0};
  OptConfig cfg;
  cfg.weight_decay = 0.0;
  for (std::uint64_t t = 1; t <= 5; ++t) adam_update(p, g, m, v, t, cfg);
  EXPECT_EQ(p[0], 0.3);
  EXPECT_EQ(p[1], -2.0);
}

TEST(Adam, CoupledDecayShrinksMagnitude) {
  std::vector<double> p{0.5, -0.5}, g{0.0, 0.0}, m{0.0, 0.0}, v{0.0, 0.0};
  OptConfig cfg;
  cfg.weight_decay = 0.1;
  double prev = 0.5;
  for (std::uint64_t t = 1; t <= 20; ++t) {
    adam_update(p, g, m, v, t, cfg);
    EXPECT_LT(std::abs(p[0]), prev);
    EXPECT_EQ(p[0], -p[1]);
    prev = std::abs(p[0]);
  }
}

TEST(Adam, MatchesReferenceRecurrence) {
  // Written out step by step for three steps with decay.
  OptConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.05;
  std::vector<double> p{0.7}, m{0.0}, v{0.0};
  const double grads[3] = {0.2, -0.4, 0.1};
  double rp = 0.7, rm = 0.0, rv = 0.0;
  for (int t = 1; t <= 3; ++t) {
    const double gt = grads[t - 1] + 0.05 * rp;
    rm = 0.9 * rm + 0.1 * gt;
    rv = 0.999 * rv + 0.001 * gt * gt;
    rp -= 0.01 * (rm / (1 - std::pow(0.9, t))) / (std::sqrt(rv / (1 - std::pow(0.999, t))) + 1e-8);
    std::vector<double> g{grads[t - 1]};
    adam_update(p, g, m, v, static_cast<std::uint64_t>(t), cfg);
    EXPECT_DOUBLE_EQ(p[0], rp);
  }
}

TEST(Adam, StepOverNetParams) {
  const NetParams init = init_params({1, 2}, 0);
  NetParams p = init;
  OptState s = make_opt_state(p, OptConfig{});
  ParamGrads g = zero_grads(p);
  g[0][0] = 1.0;
  adam_step(p, g, s);
  EXPECT_EQ(s.step, 1u);
  EXPECT_NE(p.tensors[0].values[0], init.tensors[0].values[0]);
  g.pop_back();
  EXPECT_THROW(adam_step(p, g, s), ShapeError);
}

TEST(Adam, ConfigValidation) {
  OptConfig c;
  c.lr = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.beta1 = 1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(validate(c), ConfigError);
}

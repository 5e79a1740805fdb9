#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ribcage/losses.hpp"
#include "ribcage/micronet.hpp"

using namespace ribcage;

TEST(Micronet, LayoutAndParameterCount) {
  const auto layout = conv_layout({2, 8});
  ASSERT_EQ(layout.size(), 6u);
  EXPECT_EQ(layout[0].name, "enc0");
  EXPECT_EQ(layout[2].name, "bottleneck");
  EXPECT_EQ(layout[2].out_channels, 32);
  EXPECT_EQ(layout[3].name, "dec1");
  EXPECT_EQ(layout[3].in_channels, 32 + 16);
  EXPECT_EQ(layout[5].name, "head");
  EXPECT_EQ(layout[5].kernel, 1);
  // enc0 1->2, bottleneck 2->4, dec0 (4+2)->2, head 2->1; 27-tap kernels.
  EXPECT_EQ(init_params({1, 2}, 0).parameter_count(),
            (27u * 1 * 2 + 2) + (27u * 2 * 4 + 4) + (27u * 6 * 2 + 2) + (2u + 1));
}

TEST(Micronet, InitIsSeededAndFanInScaled) {
  const NetParams a = init_params({2, 4}, 3);
  EXPECT_EQ(a, init_params({2, 4}, 3));
  EXPECT_NE(a, init_params({2, 4}, 4));
  const auto layout = conv_layout({2, 4});
  for (std::size_t l = 0; l < layout.size(); ++l) {
    const double fan_in = layout[l].in_channels * std::pow(layout[l].kernel, 3);
    const double bound = std::sqrt(6.0 / fan_in);
    for (double w : a.tensors[2 * l].values) EXPECT_LE(std::abs(w), bound);
    if (layout[l].name == "head") continue;
    for (double b : a.tensors[2 * l + 1].values) EXPECT_EQ(b, 0.0);
  }
  EXPECT_DOUBLE_EQ(a.tensors.back().values[0], std::log(0.05 / 0.95));
  EXPECT_DOUBLE_EQ(init_params({1, 2}, 0, 0.5).tensors.back().values[0], 0.0);
  EXPECT_THROW(init_params({1, 2}, 0, 1.0), ConfigError);
}

TEST(Micronet, ConfigValidation) {
  EXPECT_THROW(validate(NetConfig{0, 8}), ConfigError);
  EXPECT_THROW(validate(NetConfig{2, 0}), ConfigError);
  const NetParams p = init_params({2, 2}, 0);
  EXPECT_THROW(forward(p, Volume::filled({6, 8, 8}, {}, ValueDomain::Unit, 0.0)), ConfigError);
}

TEST(Micronet, OutputRangeAndDeterminism) {
  Rng rng(1);
  const Volume in = oracle::random_unit({8, 8, 16}, rng);
  const NetParams p = init_params({2, 4}, 1);
  const Volume out = predict(p, in);
  EXPECT_EQ(out.dims(), in.dims());
  EXPECT_EQ(out.domain(), ValueDomain::Unit);
  for (double v : out.values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(predict(p, in), out);
}

TEST(Micronet, ZeroWeightsGiveOneHalf) {
  Rng rng(2);
  const Volume out = predict(zero_params({2, 4}), oracle::random_unit({8, 8, 8}, rng));
  for (double v : out.values()) EXPECT_EQ(v, 0.5);
}

TEST(Micronet, ZeroGradOutGivesZeroGrads) {
  Rng rng(3);
  const NetParams p = init_params({2, 2}, 3);
  auto [out, cache] = forward(p, oracle::random_unit({8, 8, 8}, rng));
  const auto g = backward(p, cache, Volume::filled(out.dims(), {}, ValueDomain::Unbounded, 0.0));
  for (const auto& t : g)
    for (double x : t) EXPECT_EQ(x, 0.0);
}

TEST(Micronet, StaleCacheRejected) {
  Rng rng(4);
  NetParams p = init_params({1, 2}, 4);
  auto [out, cache] = forward(p, oracle::random_unit({8, 8, 8}, rng));
  p.tensors[0].values[0] += 1e-3;
  EXPECT_THROW(backward(p, cache, out), StaleCacheError);
  EXPECT_THROW(backward(init_params({1, 2}, 4), cache,
                        Volume::filled({4, 4, 4}, {}, ValueDomain::Unbounded, 0.0)),
               ShapeError);
}

TEST(Micronet, PoolingTieGoesToFirstElement) {
  // Constant input: every pooling window is a tie; the gradient must flow to
  // exactly one (the first) element per window, which the FD test cannot see.
  NetParams p = zero_params({1, 1});
  p.tensors[1].values[0] = 0.3;  // enc0 bias
  auto [out, cache] = forward(p, Volume::filled({4, 4, 4}, {}, ValueDomain::Unit, 0.5));
  for (std::size_t i = 0; i < cache.pool_argmax[0].size(); ++i) {
    const std::uint32_t a = cache.pool_argmax[0][i];
    const int px = static_cast<int>(i % 2), py = static_cast<int>(i / 2 % 2),
              pz = static_cast<int>(i / 4);
    EXPECT_EQ(a, static_cast<std::uint32_t>((2 * pz * 4 + 2 * py) * 4 + 2 * px));
  }
}

// Finite differences over every parameter of a depth-1, 2-channel net,
// against backward() on rib loss. Inputs whose pooling windows hold a near
// tie are redrawn.
TEST(Micronet, ParameterGradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const NetParams p = init_params({1, 2}, seed);
    Rng rng(100 + seed);
    Volume in = oracle::random_unit({8, 8, 8}, rng);
    while (oracle::min_pool_gap(forward(p, in).second) < 1e-4) in = oracle::random_unit({8, 8, 8}, rng);
    const Volume target = oracle::random_mask({8, 8, 8}, {}, 0.3, rng).volume();
    const auto r = oracle::net_gradcheck(p, in, target, 1e-5, 1e-8);
    EXPECT_EQ(r.checked, p.parameter_count());
    EXPECT_LT(r.max_rel_err, 1e-3) << "seed " << seed;
  }
}

// Gradients restricted to a sub-box of grad_out must equal the full-volume
// computation.
TEST(Micronet, RegionRestrictedBackwardIsExact) {
  Rng rng(5);
  const NetParams p = init_params({2, 3}, 5);
  const Dims d{16, 16, 8};
  const Volume in = oracle::random_unit(d, rng);
  auto [out, cache] = forward(p, in);
  std::vector<double> go(d.count(), 0.0);
  for (int z = 3; z < 6; ++z)
    for (int y = 5; y < 9; ++y)
      for (int x = 2; x < 7; ++x) go[out.offset(x, y, z)] = rng.uniform(-1.0, 1.0);
  const Volume grad_out(d, {}, ValueDomain::Unbounded, go);
  const auto g = backward(p, cache, grad_out);
  // Reference: dot(grad_out, output) differentiated by finite differences
  // on a few parameters per tensor.
  NetParams w = p;
  for (std::size_t t = 0; t < w.tensors.size(); ++t) {
    for (std::size_t i = 0; i < w.tensors[t].values.size(); i += 97) {
      const double saved = w.tensors[t].values[i];
      auto dot = [&] {
        const Volume o = predict(w, in);
        double s = 0.0;
        for (std::size_t k = 0; k < go.size(); ++k) s += go[k] * o[k];
        return s;
      };
      w.tensors[t].values[i] = saved + 1e-5;
      const double up = dot();
      w.tensors[t].values[i] = saved - 1e-5;
      const double dn = dot();
      w.tensors[t].values[i] = saved;
      const double num = (up - dn) / 2e-5;
      EXPECT_NEAR(g[t][i], num, 1e-6 + 1e-4 * std::abs(num)) << p.tensors[t].name << "[" << i << "]";
    }
  }
}

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ribcage/metrics.hpp"

using namespace ribcage;

namespace {

Mask points(Dims d, std::initializer_list<Index3> on) {
  std::vector<double> v(d.count(), 0.0);
  for (const auto& p : on) v[(static_cast<std::size_t>(p.z) * d.y + p.y) * d.x + p.x] = 1.0;
  return Mask(Volume(d, {}, ValueDomain::Unit, std::move(v)));
}

}  // namespace

TEST(Metrics, DscValues) {
  const Dims d{4, 1, 1};
  const Mask a = points(d, {{0, 0, 0}, {1, 0, 0}});
  const Mask b = points(d, {{1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  EXPECT_DOUBLE_EQ(dsc(a, b), 2.0 / 5.0);
  EXPECT_EQ(dsc(a, a), 1.0);
  EXPECT_EQ(dsc(Mask::zeros(d, {}), Mask::zeros(d, {})), 1.0);
  EXPECT_EQ(dsc(a, Mask::zeros(d, {})), 0.0);
}

TEST(Metrics, HausdorffHandExamples) {
  const Dims d{10, 10, 10};
  const Mask a = points(d, {{0, 0, 0}});
  const Mask b = points(d, {{3, 4, 0}});
  EXPECT_EQ(hausdorff(a, b, {}), 5.0);
  EXPECT_EQ(hausdorff(a, b, {2.0, 2.0, 2.0}), 10.0);
  // Directed distances differ when one set contains the other.
  const Mask c = points(d, {{0, 0, 0}, {0, 0, 6}});
  EXPECT_EQ(directed_hausdorff(a, c, {}), 0.0);
  EXPECT_EQ(directed_hausdorff(c, a, {}), 6.0);
  EXPECT_EQ(hausdorff(a, c, {}), 6.0);
  // Anisotropic spacing.
  EXPECT_EQ(hausdorff(a, c, {1.0, 1.0, 0.5}), 3.0);
}

TEST(Metrics, EmptyOperandIsAnError) {
  const Dims d{3, 3, 3};
  EXPECT_THROW(hausdorff(Mask::zeros(d, {}), Mask::ones(d, {}), {}), EmptySetError);
  EXPECT_THROW(edt_squared(Mask::zeros(d, {}), {}), EmptySetError);
  EXPECT_THROW(compare_masks(Mask::zeros(d, {}), Mask::ones(d, {}), {}), EmptySetError);
}

TEST(Metrics, EdtMatchesBruteForceExactly) {
  Rng rng(31);
  for (int k = 0; k < 6; ++k) {
    const Dims d{static_cast<int>(rng.uniform_int(1, 9)), static_cast<int>(rng.uniform_int(1, 9)),
                 static_cast<int>(rng.uniform_int(1, 9))};
    const Spacing s{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
    Mask m = oracle::random_mask(d, s, 0.1, rng);
    if (m.empty()) m = points(d, {{0, 0, 0}});
    // Integer spacings make the squared distances exact in both methods.
    const Spacing si{1.0, 2.0, 3.0};
    EXPECT_EQ(edt_squared(m, si), oracle::brute_edt_squared(m, si));
    const auto fast = edt_squared(m, s);
    const auto slow = oracle::brute_edt_squared(m, s);
    for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast[i], slow[i], 1e-12);
  }
}

TEST(Metrics, EdtVolumeIsSqrt) {
  const Mask m = points({5, 1, 1}, {{0, 0, 0}});
  const Volume e = edt(m, {});
  EXPECT_EQ(e.domain(), ValueDomain::Unbounded);
  EXPECT_EQ(e[3], 3.0);
}

TEST(Metrics, HausdorffMatchesOracles) {
  Rng rng(32);
  for (int k = 0; k < 10; ++k) {
    const Dims d{static_cast<int>(rng.uniform_int(2, 8)), static_cast<int>(rng.uniform_int(2, 8)),
                 static_cast<int>(rng.uniform_int(2, 8))};
    Mask a = oracle::random_mask(d, {}, 0.1, rng);
    Mask b = oracle::random_mask(d, {}, 0.1, rng);
    if (a.empty() || b.empty()) continue;
    const double fast = hausdorff(a, b, {1.0, 2.0, 1.0});
    EXPECT_EQ(fast, oracle::brute_hausdorff(a, b, {1.0, 2.0, 1.0}));
    EXPECT_EQ(fast, brute_force_hausdorff(a, b, {1.0, 2.0, 1.0}));
  }
}

TEST(Metrics, HausdorffProperties) {
  Rng rng(33);
  const Dims d{7, 6, 5};
  for (int k = 0; k < 10; ++k) {
    const Mask a = oracle::random_mask(d, {}, 0.15, rng);
    const Mask b = oracle::random_mask(d, {}, 0.15, rng);
    const Mask c = oracle::random_mask(d, {}, 0.15, rng);
    if (a.empty() || b.empty() || c.empty()) continue;
    EXPECT_EQ(hausdorff(a, b, {}), hausdorff(b, a, {}));
    EXPECT_EQ(hausdorff(a, a, {}), 0.0);
    EXPECT_LE(hausdorff(a, c, {}), hausdorff(a, b, {}) + hausdorff(b, c, {}) + 1e-12);
    EXPECT_DOUBLE_EQ(hausdorff(a, b, {2.0, 2.0, 2.0}), 2.0 * hausdorff(a, b, {}));
  }
}

TEST(Metrics, PercentileNearestRank) {
  // Directed distances from a to b: 0 (x4) and 9; nearest-rank 80th is 0.
  const Dims d{10, 1, 1};
  const Mask a = points(d, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {9, 0, 0}});
  const Mask b = points(d, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  EXPECT_EQ(hausdorff_percentile(a, b, {}, 100.0), 6.0);
  EXPECT_EQ(hausdorff_percentile(a, b, {}, 80.0), 0.0);
  EXPECT_EQ(hausdorff_percentile(a, b, {}, 100.0), hausdorff(a, b, {}));
}

TEST(Metrics, CompareMasksReport) {
  const Dims d{6, 1, 1};
  const Mask p = points(d, {{0, 0, 0}, {1, 0, 0}, {5, 0, 0}});
  const Mask t = points(d, {{0, 0, 0}, {1, 0, 0}});
  const MetricReport r = compare_masks(p, t, {});
  EXPECT_DOUBLE_EQ(r.dsc, 0.8);
  EXPECT_EQ(r.hd_ab, 4.0);
  EXPECT_EQ(r.hd_ba, 0.0);
  EXPECT_EQ(r.hd, 4.0);
  EXPECT_EQ(r.count_a, 3u);
  EXPECT_EQ(r.count_b, 2u);
}

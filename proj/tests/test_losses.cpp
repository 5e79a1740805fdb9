#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ribcage/losses.hpp"

using namespace ribcage;

namespace {

Volume unit(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return Volume({n, 1, 1}, {}, ValueDomain::Unit, std::move(v));
}

// Hand-evaluated on p = {0.2, 0.7, 0.9, 0.4}, g = {0, 1, 1, 0}.
const Volume kP = unit({0.2, 0.7, 0.9, 0.4});
const Volume kG = unit({0.0, 1.0, 1.0, 0.0});

}  // namespace

TEST(Losses, HandValues) {
  EXPECT_NEAR(mse_loss(kP, kG), 0.075, 1e-15);
  EXPECT_NEAR(err_loss(kP, kG).first, 0.05, 1e-15);
  EXPECT_NEAR(gf_loss(kP, kG).first, 0.025, 1e-15);
  EXPECT_NEAR(dice_loss(kP, kG), 1.0 - (3.2 + 1e-6) / (4.2 + 1e-6), 1e-15);
  const LossReport r = rib_loss(kP, kG);
  EXPECT_NEAR(r.rib, 0.15, 1e-15);
  EXPECT_EQ(r.n, 4u);
}

TEST(Losses, ErrorMapsAreVoxelwise) {
  const auto [e, er] = err_loss(kP, kG);
  const auto [g, gf] = gf_loss(kP, kG);
  EXPECT_DOUBLE_EQ(er[0], 0.2);
  EXPECT_DOUBLE_EQ(er[1], 0.0);
  EXPECT_DOUBLE_EQ(gf[1], 0.3);
  EXPECT_DOUBLE_EQ(gf[3], 0.0);
}

TEST(Losses, PerfectPredictionIsZero) {
  EXPECT_EQ(rib_loss(kG, kG).rib, 0.0);
  EXPECT_NEAR(dice_loss(kG, kG), 0.0, 1e-15);
}

TEST(Losses, MseSplitsIntoErrAndGfForBinaryTargets) {
  Rng rng(12);
  const Volume p = oracle::random_unit({6, 5, 4}, rng);
  const Volume g = oracle::random_mask({6, 5, 4}, {}, 0.5, rng).volume();
  const LossReport r = rib_loss(p, g);
  EXPECT_NEAR(r.mse, r.err + r.gf, 1e-14);
}

TEST(Losses, RegionCrop) {
  Rng rng(13);
  const Volume p = oracle::random_unit({6, 6, 6}, rng);
  const Volume g = oracle::random_mask({6, 6, 6}, {}, 0.5, rng).volume();
  const Box box{{1, 2, 3}, {3, 2, 2}};
  const LossReport crop_r = region_loss(p, g, box, LossRegion::DefectCrop);
  EXPECT_EQ(crop_r.n, 12u);
  EXPECT_EQ(crop_r.region, LossRegion::DefectCrop);
  EXPECT_DOUBLE_EQ(crop_r.mse, mse_loss(crop(p, box), crop(g, box)));
  EXPECT_EQ(region_loss(p, g, box, LossRegion::FullVolume).n, 216u);
}

TEST(Losses, ShapeMismatchRejected) {
  EXPECT_THROW(mse_loss(kP, unit({0.0, 1.0})), ShapeError);
}

TEST(Losses, ParseKinds) {
  EXPECT_EQ(parse_loss_kind("mse+err+gf"), LossKind::Rib);
  EXPECT_EQ(parse_loss_kind("rib"), LossKind::Rib);
  EXPECT_EQ(parse_loss_kind("mse+err"), LossKind::MseErr);
  EXPECT_EQ(parse_loss_kind("dice"), LossKind::Dice);
  EXPECT_THROW(parse_loss_kind("l1"), ConfigError);
  EXPECT_EQ(parse_loss_region("crop"), LossRegion::DefectCrop);
  EXPECT_EQ(parse_loss_region("full"), LossRegion::FullVolume);
}

TEST(Losses, HandGradients) {
  const Volume gm = loss_gradient(LossKind::Mse, kP, kG);
  EXPECT_NEAR(gm[0], 2 * 0.2 / 4, 1e-15);
  EXPECT_NEAR(gm[1], 2 * (0.7 - 1.0) / 4, 1e-15);
  const Volume ge = loss_gradient(LossKind::Err, kP, kG);
  EXPECT_NEAR(ge[3], 2 * 0.4 / 4, 1e-15);
  EXPECT_EQ(ge[1], 0.0);
  const Volume gg = loss_gradient(LossKind::Gf, kP, kG);
  EXPECT_NEAR(gg[2], -2 * 0.1 / 4, 1e-15);
  EXPECT_EQ(gg[0], 0.0);
}

// Independent central differences in the test, on the Volume-level API.
TEST(Losses, GradientsMatchFiniteDifferences) {
  Rng rng(21);
  const Dims d{4, 3, 3};
  for (auto kind : {LossKind::Dice, LossKind::Mse, LossKind::Err, LossKind::Gf, LossKind::MseErr,
                    LossKind::Rib}) {
    const Volume p = oracle::random_unit(d, rng, 0.05, 0.95);
    const Volume g = oracle::random_mask(d, {}, 0.5, rng).volume();
    const Volume a = loss_gradient(kind, p, g);
    const double h = 1e-4;
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::vector<double> up(p.values().begin(), p.values().end()), dn = up;
      up[i] += h;
      dn[i] -= h;
      const double num = (loss_value(kind, Volume(d, {}, ValueDomain::Unit, up), g) -
                          loss_value(kind, Volume(d, {}, ValueDomain::Unit, dn), g)) /
                         (2 * h);
      EXPECT_NEAR(a[i], num, 1e-8 + 1e-6 * std::abs(num)) << to_string(kind) << " voxel " << i;
    }
  }
}

TEST(Losses, FiniteDiffCheckerAgreesAndRejectsBadStep) {
  Rng rng(22);
  const Volume p = oracle::random_unit({5, 5, 5}, rng, 0.05, 0.95);
  const Volume g = oracle::random_mask({5, 5, 5}, {}, 0.5, rng).volume();
  EXPECT_LT(finite_diff_check(LossKind::Rib, p, g, 1e-3), 1e-6);
  EXPECT_LT(finite_diff_check(LossKind::Dice, p, g, 1e-3), 1e-6);
  EXPECT_THROW(finite_diff_check(LossKind::Rib, p, g, 0.0), ConfigError);
  EXPECT_THROW(finite_diff_check(LossKind::Rib, p, g, -1e-3), ConfigError);
}

TEST(Losses, RandomPairGradcheckIsSeeded) {
  const double a = gradcheck_random_pairs(LossKind::Dice, 4, 3, 1e-3, 7);
  EXPECT_EQ(a, gradcheck_random_pairs(LossKind::Dice, 4, 3, 1e-3, 7));
  EXPECT_LT(a, 1e-4);
}

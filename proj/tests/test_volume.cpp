#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ribcage/volume.hpp"

using namespace ribcage;

namespace {

Volume ramp(Dims d, ValueDomain dom = ValueDomain::Unbounded) {
  std::vector<double> v(d.count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  return Volume(d, {}, dom, std::move(v));
}

}  // namespace

TEST(Volume, LayoutIsXFastest) {
  const Volume v = ramp({3, 4, 5});
  EXPECT_EQ(v.offset(1, 0, 0), 1u);
  EXPECT_EQ(v.offset(0, 1, 0), 3u);
  EXPECT_EQ(v.offset(0, 0, 1), 12u);
  EXPECT_EQ(v.at(2, 3, 4), 59.0);
}

TEST(Volume, ConstructorValidates) {
  EXPECT_THROW(Volume({2, 2, 2}, {}, ValueDomain::Unbounded, std::vector<double>(7)), ShapeError);
  EXPECT_THROW(Volume({2, 2, 2}, {0.0, 1.0, 1.0}, ValueDomain::Unbounded,
                      std::vector<double>(8)),
               Error);
  EXPECT_THROW(Volume({1, 1, 2}, {}, ValueDomain::Unit, {0.5, 1.5}), DomainError);
  EXPECT_THROW(Volume({1, 1, 1}, {}, ValueDomain::Unit, {std::nan("")}), DomainError);
  EXPECT_NO_THROW(Volume({1, 1, 2}, {}, ValueDomain::HU, {-1000.0, 3000.0}));
}

TEST(Volume, MaskRejectsNonBinary) {
  EXPECT_THROW(Mask(Volume({1, 1, 2}, {}, ValueDomain::Unit, {0.0, 0.5})), DomainError);
  const Mask m(Volume({1, 1, 3}, {}, ValueDomain::Unit, {0.0, 1.0, 1.0}));
  EXPECT_EQ(m.count(), 2u);
  EXPECT_TRUE(Mask::zeros({2, 2, 2}, {}).empty());
  EXPECT_EQ(Mask::ones({2, 2, 2}, {}).count(), 8u);
}

TEST(Volume, ComplementIsInvolution) {
  Rng rng(3);
  const Volume v = oracle::random_unit({4, 3, 2}, rng);
  const Volume c = complement(v);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_DOUBLE_EQ(c[i], 1.0 - v[i]);
  const Volume cc = complement(c);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(cc[i], v[i], 1e-15);
  EXPECT_THROW(complement(ramp({2, 1, 1})), DomainError);
}

TEST(Volume, ElementwiseMulChecksShape) {
  EXPECT_THROW(elementwise_mul(ramp({2, 2, 2}), ramp({2, 2, 1})), ShapeError);
  const Volume a({1, 1, 2}, {}, ValueDomain::Unit, {0.5, 1.0});
  const Volume b({1, 1, 2}, {}, ValueDomain::Unit, {0.5, 0.0});
  const Volume p = elementwise_mul(a, b);
  EXPECT_EQ(p[0], 0.25);
  EXPECT_EQ(p[1], 0.0);
}

TEST(Volume, BinarizeTieGoesToOne) {
  const Volume v({1, 1, 3}, {}, ValueDomain::Unit, {0.49, 0.5, 0.51});
  const Mask m = binarize(v, 0.5);
  EXPECT_FALSE(m.test(0));
  EXPECT_TRUE(m.test(1));
  EXPECT_TRUE(m.test(2));
  EXPECT_THROW(binarize(v, std::nan("")), DomainError);
}

TEST(Volume, Reductions) {
  const Volume v = ramp({2, 2, 2});
  EXPECT_EQ(sum(v), 28.0);
  EXPECT_EQ(mean(v), 3.5);
  EXPECT_EQ(min_value(v), 0.0);
  EXPECT_EQ(max_value(v), 7.0);
}

TEST(Volume, CropPasteRoundTrip) {
  const Volume v = ramp({5, 4, 3});
  const Box box{{1, 2, 1}, {3, 2, 2}};
  const Volume c = crop(v, box);
  EXPECT_EQ(c.dims(), (Dims{3, 2, 2}));
  EXPECT_EQ(c.at(0, 0, 0), v.at(1, 2, 1));
  EXPECT_EQ(c.at(2, 1, 1), v.at(3, 3, 2));
  const Volume zero = Volume::filled(v.dims(), {}, ValueDomain::Unbounded, -1.0);
  const Volume back = paste(zero, c, box.origin);
  EXPECT_EQ(crop(back, box), c);
  EXPECT_EQ(back.at(0, 0, 0), -1.0);
  EXPECT_THROW(crop(v, Box{{3, 0, 0}, {3, 1, 1}}), ShapeError);
}

TEST(Volume, PasteTakesMaximum) {
  const Volume dst({1, 1, 2}, {}, ValueDomain::Unit, {0.8, 0.1});
  const Volume src({1, 1, 2}, {}, ValueDomain::Unit, {0.2, 0.9});
  const Volume out = paste(dst, src, {0, 0, 0});
  EXPECT_EQ(out[0], 0.8);
  EXPECT_EQ(out[1], 0.9);
}

TEST(Volume, TrilinearIdentityAndSpacing) {
  Rng rng(7);
  const Volume v = oracle::random_unit({5, 4, 3}, rng);
  EXPECT_EQ(trilinear_resize(v, v.dims()), v);

  const Volume w({4, 4, 4}, {2.0, 2.0, 2.0}, ValueDomain::Unbounded, std::vector<double>(64, 3.0));
  const Volume r = trilinear_resize(w, {8, 2, 4});
  EXPECT_DOUBLE_EQ(r.spacing().x, 1.0);
  EXPECT_DOUBLE_EQ(r.spacing().y, 4.0);
  EXPECT_DOUBLE_EQ(r.spacing().z, 2.0);
  for (double x : r.values()) EXPECT_DOUBLE_EQ(x, 3.0);
}

TEST(Volume, TrilinearReproducesLinearField) {
  // Corner-aligned: sample j of n' maps to j * (n-1)/(n'-1).
  std::vector<double> f(6 * 5 * 4);
  const Dims d{6, 5, 4};
  for (int z = 0; z < d.z; ++z)
    for (int y = 0; y < d.y; ++y)
      for (int x = 0; x < d.x; ++x) f[(z * d.y + y) * d.x + x] = 2.0 * x - 3.0 * y + 0.5 * z;
  const Volume v(d, {}, ValueDomain::Unbounded, f);
  const Dims t{11, 3, 7};
  const Volume r = trilinear_resize(v, t);
  for (int z = 0; z < t.z; ++z)
    for (int y = 0; y < t.y; ++y)
      for (int x = 0; x < t.x; ++x) {
        const double sx = x * 5.0 / 10.0, sy = y * 4.0 / 2.0, sz = z * 3.0 / 6.0;
        EXPECT_NEAR(r.at(x, y, z), 2.0 * sx - 3.0 * sy + 0.5 * sz, 1e-12);
      }
}

TEST(Volume, DomainTagRoundTrip) {
  for (auto d : {ValueDomain::HU, ValueDomain::Unit, ValueDomain::Unbounded}) {
    EXPECT_EQ(parse_value_domain(to_string(d)), d);
  }
  EXPECT_THROW(parse_value_domain("celsius"), ConfigError);
}

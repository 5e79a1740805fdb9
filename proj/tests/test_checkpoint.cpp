#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "ribcage/checkpoint.hpp"
#include "scratch.hpp"

using namespace ribcage;

namespace {

Checkpoint sample() {
  Checkpoint c;
  c.params = init_params({2, 3}, 8);
  c.opt = make_opt_state(c.params, OptConfig{});
  c.opt.step = 12;
  c.opt.m[1][0] = 0.25;
  c.opt.v[3][2] = 1e-9;
  return c;
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& p, const std::vector<char>& b) {
  std::ofstream(p, std::ios::binary | std::ios::trunc).write(b.data(), static_cast<std::streamsize>(b.size()));
}

std::string field_of(const std::filesystem::path& p) {
  try {
    read_checkpoint(p);
  } catch (const FormatError& e) {
    return e.field();
  }
  return "<none>";
}

}  // namespace

TEST(Checkpoint, RoundTripIsExact) {
  Scratch s;
  const Checkpoint c = sample();
  write_checkpoint(s / "c.bin", c);
  EXPECT_EQ(read_checkpoint(s / "c.bin"), c);
  const auto b = slurp(s / "c.bin");
  EXPECT_EQ(std::memcmp(b.data(), "RIBCKPT\0", 8), 0);
  EXPECT_EQ(b[8], 1);  // version, little-endian
}

TEST(Checkpoint, CorruptionDetected) {
  Scratch s;
  write_checkpoint(s / "c.bin", sample());
  const auto good = slurp(s / "c.bin");

  auto b = good;
  b[0] = 'X';
  dump(s / "a.bin", b);
  EXPECT_EQ(field_of(s / "a.bin"), "magic");

  b = good;
  b[8] = 2;
  dump(s / "b.bin", b);
  EXPECT_EQ(field_of(s / "b.bin"), "version");

  b = good;
  b.resize(b.size() - 3);
  dump(s / "c2.bin", b);
  EXPECT_EQ(field_of(s / "c2.bin"), "moments");

  b = good;
  b[16] = 5;  // base channels 3 -> 5: tensor sizes no longer match
  dump(s / "d.bin", b);
  EXPECT_EQ(field_of(s / "d.bin"), "tensor");

  b = good;
  b.push_back(0);
  dump(s / "e.bin", b);
  EXPECT_EQ(field_of(s / "e.bin"), "trailing");
}

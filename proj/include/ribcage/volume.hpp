#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ribcage/error.hpp"

namespace ribcage {

/// Voxel counts along x (width), y (height) and z (depth, the "height axis"
/// of the ribcage pipeline).
struct Dims {
  int x = 0;
  int y = 0;
  int z = 0;

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(y) *
           static_cast<std::size_t>(z);
  }
  bool positive() const noexcept { return x > 0 && y > 0 && z > 0; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& d);

/// Millimetres per voxel.
struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;
  friend bool operator==(const Spacing&, const Spacing&) = default;
};

struct Index3 {
  int x = 0;
  int y = 0;
  int z = 0;
  friend bool operator==(const Index3&, const Index3&) = default;
};

/// Axis-aligned sub-grid: `origin` is the first voxel, `size` the extent.
struct Box {
  Index3 origin;
  Dims size;

  bool fits_in(const Dims& d) const noexcept;
  friend bool operator==(const Box&, const Box&) = default;
};

enum class ValueDomain : std::uint8_t { HU, Unit, Unbounded };

const char* to_string(ValueDomain d) noexcept;
ValueDomain parse_value_domain(const std::string& s);

/// Dense scalar grid, x fastest then y then z. Immutable once built: every
/// operation below returns a new volume.
class Volume {
 public:
  Volume() = default;
  /// Validates the data length, the spacing and (for Unit) the value range.
  Volume(Dims dims, Spacing spacing, ValueDomain domain,
         std::vector<double> data);

  static Volume filled(Dims dims, Spacing spacing, ValueDomain domain,
                       double value);

  const Dims& dims() const noexcept { return dims_; }
  const Spacing& spacing() const noexcept { return spacing_; }
  ValueDomain domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const double> values() const noexcept { return data_; }

  std::size_t offset(int x, int y, int z) const noexcept {
    return (static_cast<std::size_t>(z) * static_cast<std::size_t>(dims_.y) +
            static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(dims_.x) +
           static_cast<std::size_t>(x);
  }
  double at(int x, int y, int z) const noexcept { return data_[offset(x, y, z)]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Moves the storage out; the volume is left empty.
  std::vector<double> release() && { return std::move(data_); }

  /// Same voxels, different domain tag (re-validated).
  Volume with_domain(ValueDomain domain) const;

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Dims dims_;
  Spacing spacing_;
  ValueDomain domain_ = ValueDomain::Unbounded;
  std::vector<double> data_;
};

/// Binary Unit-domain volume: every voxel is exactly 0 or 1.
class Mask {
 public:
  Mask() = default;
  /// Throws DomainError unless every voxel of `v` is 0 or 1.
  explicit Mask(Volume v);

  static Mask zeros(Dims dims, Spacing spacing);
  static Mask ones(Dims dims, Spacing spacing);

  const Volume& volume() const noexcept { return v_; }
  const Dims& dims() const noexcept { return v_.dims(); }
  const Spacing& spacing() const noexcept { return v_.spacing(); }
  bool test(int x, int y, int z) const noexcept { return v_.at(x, y, z) != 0.0; }
  bool test(std::size_t i) const noexcept { return v_[i] != 0.0; }
  std::size_t count() const noexcept;
  bool empty() const noexcept { return count() == 0; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  Volume v_;
};

// Reductions accumulate sequentially in index order so results are
// reproducible bit for bit.
double sum(const Volume& v) noexcept;
double mean(const Volume& v) noexcept;
double min_value(const Volume& v) noexcept;
double max_value(const Volume& v) noexcept;

Volume elementwise_mul(const Volume& a, const Volume& b);
/// 1 - v; requires a Unit-domain input.
Volume complement(const Volume& v);
/// 1 where v >= tau, else 0. Rejects NaN voxels and a non-finite tau.
Mask binarize(const Volume& v, double tau);
/// Corner-aligned trilinear resampling. Spacing is rescaled so the physical
/// extent dims*spacing is preserved.
Volume trilinear_resize(const Volume& v, Dims target);
Volume crop(const Volume& v, const Box& box);
Mask crop(const Mask& m, const Box& box);
/// Writes `src` into a copy of `dst` at `origin` by voxelwise maximum.
Volume paste(const Volume& dst, const Volume& src, Index3 origin);
Mask paste(const Mask& dst, const Mask& src, Index3 origin);

}  // namespace ribcage

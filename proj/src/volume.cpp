#include "ribcage/volume.hpp"

#include <algorithm>
#include <cmath>

namespace ribcage {

std::string to_string(const Dims& d) {
  return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" + std::to_string(d.z);
}

bool Box::fits_in(const Dims& d) const noexcept {
  if (!size.positive()) return false;
  if (origin.x < 0 || origin.y < 0 || origin.z < 0) return false;
  return origin.x + size.x <= d.x && origin.y + size.y <= d.y &&
         origin.z + size.z <= d.z;
}

const char* to_string(ValueDomain d) noexcept {
  switch (d) {
    case ValueDomain::HU:
      return "hu";
    case ValueDomain::Unit:
      return "unit";
    case ValueDomain::Unbounded:
      return "unbounded";
  }
  return "unbounded";
}

ValueDomain parse_value_domain(const std::string& s) {
  if (s == "hu") return ValueDomain::HU;
  if (s == "unit") return ValueDomain::Unit;
  if (s == "unbounded") return ValueDomain::Unbounded;
  throw ConfigError("unknown value domain '" + s + "'");
}

namespace {

void check_spacing(const Spacing& s) {
  for (double c : {s.x, s.y, s.z}) {
    if (!std::isfinite(c) || c <= 0.0) {
      throw ShapeError("spacing components must be finite and > 0");
    }
  }
}

void check_same_dims(const Dims& a, const Dims& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": dimension mismatch " + to_string(a) +
                     " vs " + to_string(b));
  }
}

}  // namespace

Volume::Volume(Dims dims, Spacing spacing, ValueDomain domain,
               std::vector<double> data)
    : dims_(dims), spacing_(spacing), domain_(domain), data_(std::move(data)) {
  if (!dims_.positive()) throw ShapeError("dims must be positive, got " + to_string(dims_));
  if (data_.size() != dims_.count()) {
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match dims " + to_string(dims_));
  }
  check_spacing(spacing_);
  if (domain_ == ValueDomain::Unit) {
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const double v = data_[i];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("unit-domain voxel " + std::to_string(i) +
                          " out of [0, 1]: " + std::to_string(v));
      }
    }
  }
}

Volume Volume::filled(Dims dims, Spacing spacing, ValueDomain domain, double value) {
  return Volume(dims, spacing, domain, std::vector<double>(dims.count(), value));
}

Volume Volume::with_domain(ValueDomain domain) const {
  return Volume(dims_, spacing_, domain, data_);
}

Mask::Mask(Volume v) : v_(std::move(v)) {
  if (v_.domain() != ValueDomain::Unit) {
    v_ = v_.with_domain(ValueDomain::Unit);
  }
  for (double x : v_.values()) {
    if (x != 0.0 && x != 1.0) throw DomainError("mask voxels must be exactly 0 or 1");
  }
}

Mask Mask::zeros(Dims dims, Spacing spacing) {
  return Mask(Volume::filled(dims, spacing, ValueDomain::Unit, 0.0));
}

Mask Mask::ones(Dims dims, Spacing spacing) {
  return Mask(Volume::filled(dims, spacing, ValueDomain::Unit, 1.0));
}

std::size_t Mask::count() const noexcept {
  std::size_t n = 0;
  for (double x : v_.values()) n += x != 0.0;
  return n;
}

double sum(const Volume& v) noexcept {
  double acc = 0.0;
  for (double x : v.values()) acc += x;
  return acc;
}

double mean(const Volume& v) noexcept {
  return v.size() == 0 ? 0.0 : sum(v) / static_cast<double>(v.size());
}

double min_value(const Volume& v) noexcept {
  return v.size() == 0 ? 0.0 : *std::min_element(v.values().begin(), v.values().end());
}

double max_value(const Volume& v) noexcept {
  return v.size() == 0 ? 0.0 : *std::max_element(v.values().begin(), v.values().end());
}

Volume elementwise_mul(const Volume& a, const Volume& b) {
  check_same_dims(a.dims(), b.dims(), "elementwise_mul");
  std::vector<double> out(a.size());
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const bool unit = a.domain() == ValueDomain::Unit && b.domain() == ValueDomain::Unit;
  return Volume(a.dims(), a.spacing(), unit ? ValueDomain::Unit : ValueDomain::Unbounded,
                std::move(out));
}

Volume complement(const Volume& v) {
  if (v.domain() != ValueDomain::Unit) {
    throw DomainError(std::string("complement requires a unit-domain volume, got ") +
                      to_string(v.domain()));
  }
  std::vector<double> out(v.size());
  const auto in = v.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 - in[i];
  return Volume(v.dims(), v.spacing(), ValueDomain::Unit, std::move(out));
}

Mask binarize(const Volume& v, double tau) {
  if (!std::isfinite(tau)) throw DomainError("binarize threshold must be finite");
  std::vector<double> out(v.size());
  const auto in = v.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::isnan(in[i])) throw DomainError("binarize: NaN at voxel " + std::to_string(i));
    out[i] = in[i] >= tau ? 1.0 : 0.0;
  }
  return Mask(Volume(v.dims(), v.spacing(), ValueDomain::Unit, std::move(out)));
}

namespace {

struct AxisSample {
  int lo;
  int hi;
  double t;
};

// Corner-aligned: output index 0 maps to input 0, the last output index to
// the last input index.
std::vector<AxisSample> axis_samples(int n_in, int n_out) {
  std::vector<AxisSample> s(static_cast<std::size_t>(n_out));
  for (int i = 0; i < n_out; ++i) {
    if (n_in == 1 || n_out == 1) {
      s[static_cast<std::size_t>(i)] = {0, 0, 0.0};
      continue;
    }
    const double pos = static_cast<double>(i) * static_cast<double>(n_in - 1) /
                       static_cast<double>(n_out - 1);
    int lo = static_cast<int>(std::floor(pos));
    lo = std::clamp(lo, 0, n_in - 1);
    const int hi = std::min(lo + 1, n_in - 1);
    s[static_cast<std::size_t>(i)] = {lo, hi, pos - lo};
  }
  return s;
}

}  // namespace

Volume trilinear_resize(const Volume& v, Dims target) {
  if (!target.positive()) {
    throw ShapeError("trilinear_resize: target dims must be positive, got " + to_string(target));
  }
  const Dims& d = v.dims();
  if (target == d) return v;

  const auto sx = axis_samples(d.x, target.x);
  const auto sy = axis_samples(d.y, target.y);
  const auto sz = axis_samples(d.z, target.z);
  const double lo_bound = min_value(v);
  const double hi_bound = max_value(v);

  std::vector<double> out(target.count());
  std::size_t o = 0;
  for (int z = 0; z < target.z; ++z) {
    const auto& az = sz[static_cast<std::size_t>(z)];
    for (int y = 0; y < target.y; ++y) {
      const auto& ay = sy[static_cast<std::size_t>(y)];
      for (int x = 0; x < target.x; ++x, ++o) {
        const auto& ax = sx[static_cast<std::size_t>(x)];
        auto lerp = [](double a, double b, double t) { return t == 0.0 ? a : a + (b - a) * t; };
        const double c00 = lerp(v.at(ax.lo, ay.lo, az.lo), v.at(ax.hi, ay.lo, az.lo), ax.t);
        const double c10 = lerp(v.at(ax.lo, ay.hi, az.lo), v.at(ax.hi, ay.hi, az.lo), ax.t);
        const double c01 = lerp(v.at(ax.lo, ay.lo, az.hi), v.at(ax.hi, ay.lo, az.hi), ax.t);
        const double c11 = lerp(v.at(ax.lo, ay.hi, az.hi), v.at(ax.hi, ay.hi, az.hi), ax.t);
        const double c0 = lerp(c00, c10, ay.t);
        const double c1 = lerp(c01, c11, ay.t);
        // Rounding in the lerp chain can step a hair outside the input range.
        out[o] = std::clamp(lerp(c0, c1, az.t), lo_bound, hi_bound);
      }
    }
  }
  const Spacing sp{v.spacing().x * d.x / target.x, v.spacing().y * d.y / target.y,
                   v.spacing().z * d.z / target.z};
  return Volume(target, sp, v.domain(), std::move(out));
}

Volume crop(const Volume& v, const Box& box) {
  if (!box.fits_in(v.dims())) {
    throw ShapeError("crop box out of bounds for dims " + to_string(v.dims()));
  }
  std::vector<double> out(box.size.count());
  std::size_t o = 0;
  for (int z = 0; z < box.size.z; ++z) {
    for (int y = 0; y < box.size.y; ++y) {
      const std::size_t row = v.offset(box.origin.x, box.origin.y + y, box.origin.z + z);
      for (int x = 0; x < box.size.x; ++x) out[o++] = v[row + static_cast<std::size_t>(x)];
    }
  }
  return Volume(box.size, v.spacing(), v.domain(), std::move(out));
}

Mask crop(const Mask& m, const Box& box) { return Mask(crop(m.volume(), box)); }

Volume paste(const Volume& dst, const Volume& src, Index3 origin) {
  const Box box{origin, src.dims()};
  if (!box.fits_in(dst.dims())) {
    throw ShapeError("paste region out of bounds for dims " + to_string(dst.dims()));
  }
  std::vector<double> out(dst.values().begin(), dst.values().end());
  std::size_t s = 0;
  for (int z = 0; z < box.size.z; ++z) {
    for (int y = 0; y < box.size.y; ++y) {
      const std::size_t row = dst.offset(origin.x, origin.y + y, origin.z + z);
      for (int x = 0; x < box.size.x; ++x, ++s) {
        double& d = out[row + static_cast<std::size_t>(x)];
        d = std::max(d, src[s]);
      }
    }
  }
  ValueDomain domain = dst.domain();
  if (domain == ValueDomain::Unit && src.domain() != ValueDomain::Unit) {
    domain = ValueDomain::Unbounded;
  }
  return Volume(dst.dims(), dst.spacing(), domain, std::move(out));
}

Mask paste(const Mask& dst, const Mask& src, Index3 origin) {
  return Mask(paste(dst.volume(), src.volume(), origin));
}

}  // namespace ribcage

#include "ribcage/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ribcage/rng.hpp"

namespace ribcage {

namespace {

struct Point {
  double x, y, z;
};

// Rib curves are inset from the torso outline by the tube radius plus a
// two-voxel soft-tissue margin.
double rib_semi_x(const PhantomSpec& s) { return s.torso_semi_x - s.rib_radius - 2.0; }
double rib_semi_y(const PhantomSpec& s) { return s.torso_semi_y - s.rib_radius - 2.0; }
double spine_radius(const PhantomSpec& s) { return 2.5 * s.rib_radius; }

double segment_distance_sq(const Point& p, const Point& a, const Point& b) {
  const double ux = b.x - a.x, uy = b.y - a.y, uz = b.z - a.z;
  const double wx = p.x - a.x, wy = p.y - a.y, wz = p.z - a.z;
  const double len_sq = ux * ux + uy * uy + uz * uz;
  double t = len_sq > 0.0 ? (wx * ux + wy * uy + wz * uz) / len_sq : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = wx - t * ux, dy = wy - t * uy, dz = wz - t * uz;
  return dx * dx + dy * dy + dz * dz;
}

// Left half-ellipse from the posterior midline, around the left flank, to
// the anterior midline. Consecutive samples are at most 0.5 voxel apart.
std::vector<Point> rib_polyline(double cx, double cy, double z, double a, double b) {
  const int segments =
      std::max(8, static_cast<int>(std::ceil(std::max(a, b) * std::numbers::pi / 0.5)));
  std::vector<Point> pts(static_cast<std::size_t>(segments) + 1);
  for (int i = 0; i <= segments; ++i) {
    const double phi = -std::numbers::pi / 2 + std::numbers::pi * i / segments;
    pts[static_cast<std::size_t>(i)] = {cx - a * std::cos(phi), cy + b * std::sin(phi), z};
  }
  return pts;
}

// Marks every voxel whose centre is within `radius` of the polyline; with
// `mirror` the mark lands on the sagittally reflected voxel instead.
void rasterize_tube(const std::vector<Point>& pts, double radius, bool mirror,
                    const Dims& d, std::vector<double>& bone) {
  const double r_sq = radius * radius;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const Point& a = pts[s];
    const Point& b = pts[s + 1];
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius)));
    const int x1 = std::min(d.x - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius)));
    const int y1 = std::min(d.y - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + radius)));
    const int z0 = std::max(0, static_cast<int>(std::floor(std::min(a.z, b.z) - radius)));
    const int z1 = std::min(d.z - 1, static_cast<int>(std::ceil(std::max(a.z, b.z) + radius)));
    for (int z = z0; z <= z1; ++z) {
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          if (segment_distance_sq({double(x), double(y), double(z)}, a, b) <= r_sq) {
            const int mx = mirror ? d.x - 1 - x : x;
            bone[(static_cast<std::size_t>(z) * d.y + y) * d.x + mx] = 1.0;
          }
        }
      }
    }
  }
}

}  // namespace

void validate(const PhantomSpec& s) {
  if (!s.dims.positive()) throw ShapeError("phantom dims must be positive");
  if (s.rib_pairs < 1) throw ConfigError("rib pair count must be >= 1");
  if (!(s.rib_radius > 0.0) || !(s.torso_semi_x > 0.0) || !(s.torso_semi_y > 0.0)) {
    throw ConfigError("phantom radii and semi-axes must be positive");
  }
  if (!(s.bone_hu > s.soft_tissue_hu && s.soft_tissue_hu > s.background_hu)) {
    throw ConfigError("intensities must satisfy bone > soft tissue > background");
  }
  if (!(s.jitter >= 0.0) || !std::isfinite(s.jitter)) throw ConfigError("jitter must be >= 0");
  for (double c : {s.spacing.x, s.spacing.y, s.spacing.z}) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("spacing must be finite and > 0");
  }

  const double cx = (s.dims.x - 1) / 2.0;
  const double cy = (s.dims.y - 1) / 2.0;
  const int tube = 2 * static_cast<int>(std::ceil(s.rib_radius)) + 1;
  const int smallest = std::min({s.dims.x, s.dims.y, s.dims.z});
  if (smallest < tube) {
    throw ShapeError("dims " + to_string(s.dims) + " cannot hold a rib tube of diameter " +
                     std::to_string(tube) + " voxels");
  }
  if (s.torso_semi_x > cx || s.torso_semi_y > cy) {
    throw ShapeError("torso ellipse semi-axes (" + std::to_string(s.torso_semi_x) + ", " +
                     std::to_string(s.torso_semi_y) + ") do not fit in dims " + to_string(s.dims));
  }
  if (rib_semi_x(s) <= s.rib_radius + s.jitter || rib_semi_y(s) <= s.rib_radius + s.jitter) {
    throw ShapeError("torso semi-axes too small for rib radius " + std::to_string(s.rib_radius));
  }
  if (cy - rib_semi_y(s) - spine_radius(s) < 0.0) {
    throw ShapeError("spine cylinder does not fit posterior to the ribs");
  }
  const double rib_band = 0.8 * (s.dims.z - 1);
  if (rib_band < tube) {
    throw ShapeError("height " + std::to_string(s.dims.z) + " too small to stack rib tubes");
  }
}

Mask phantom_bone_stencil(const PhantomSpec& s) {
  validate(s);
  const Dims& d = s.dims;
  std::vector<double> bone(d.count(), 0.0);
  const double cx = (d.x - 1) / 2.0;
  const double cy = (d.y - 1) / 2.0;
  const double zmax = d.z - 1;

  // Ribs: left side rasterized directly, right side through the mirror so a
  // zero-jitter phantom is exactly symmetric.
  Rng rng(s.seed);
  const double z_lo = 0.12 * zmax;
  const double z_hi = 0.92 * zmax;
  for (int k = 0; k < s.rib_pairs; ++k) {
    const double z = z_lo + (k + 0.5) * (z_hi - z_lo) / s.rib_pairs;
    for (bool mirror : {false, true}) {
      const double dz = s.jitter * rng.uniform(-1.0, 1.0);
      const double da = s.jitter * rng.uniform(-1.0, 1.0);
      const double db = s.jitter * rng.uniform(-1.0, 1.0);
      const auto pts = rib_polyline(cx, cy, z + dz, rib_semi_x(s) + da, rib_semi_y(s) + db);
      rasterize_tube(pts, s.rib_radius, mirror, d, bone);
    }
  }

  // Spine: posterior vertical cylinder through the ribs' posterior ends.
  const double spine_y = cy - rib_semi_y(s);
  const double spine_r_sq = spine_radius(s) * spine_radius(s);
  const int spine_z0 = static_cast<int>(std::ceil(0.03 * zmax));
  const int spine_z1 = static_cast<int>(std::floor(0.97 * zmax));
  // Sternum: anterior vertical bar across the ribs' anterior ends.
  const double sternum_y = cy + rib_semi_y(s);
  const double sternum_half_x = 1.5 * s.rib_radius + 1.0;
  const double sternum_half_y = s.rib_radius;
  const int sternum_z0 = static_cast<int>(std::ceil(0.42 * zmax));
  const int sternum_z1 = static_cast<int>(std::floor(0.86 * zmax));

  for (int z = 0; z < d.z; ++z) {
    const bool in_spine = z >= spine_z0 && z <= spine_z1;
    const bool in_sternum = z >= sternum_z0 && z <= sternum_z1;
    if (!in_spine && !in_sternum) continue;
    for (int y = 0; y < d.y; ++y) {
      for (int x = 0; x < d.x; ++x) {
        const double dx = x - cx;
        const double dys = y - spine_y;
        const bool spine = in_spine && dx * dx + dys * dys <= spine_r_sq;
        const bool sternum = in_sternum && std::abs(dx) <= sternum_half_x &&
                             std::abs(y - sternum_y) <= sternum_half_y;
        if (spine || sternum) bone[(static_cast<std::size_t>(z) * d.y + y) * d.x + x] = 1.0;
      }
    }
  }
  return Mask(Volume(d, s.spacing, ValueDomain::Unit, std::move(bone)));
}

Volume generate_phantom(const PhantomSpec& s) {
  const Mask bone = phantom_bone_stencil(s);
  const Dims& d = s.dims;
  const double cx = (d.x - 1) / 2.0;
  const double cy = (d.y - 1) / 2.0;
  std::vector<double> hu(d.count());
  std::size_t i = 0;
  for (int z = 0; z < d.z; ++z) {
    for (int y = 0; y < d.y; ++y) {
      for (int x = 0; x < d.x; ++x, ++i) {
        const double ex = (x - cx) / s.torso_semi_x;
        const double ey = (y - cy) / s.torso_semi_y;
        if (bone.test(i)) {
          hu[i] = s.bone_hu;
        } else if (ex * ex + ey * ey <= 1.0) {
          hu[i] = s.soft_tissue_hu;
        } else {
          hu[i] = s.background_hu;
        }
      }
    }
  }
  return Volume(d, s.spacing, ValueDomain::HU, std::move(hu));
}

std::vector<Volume> generate_dataset(const PhantomSpec& spec, int n_cases, std::uint64_t seed) {
  if (n_cases < 1) throw ConfigError("n_cases must be >= 1");
  std::vector<Volume> out;
  out.reserve(static_cast<std::size_t>(n_cases));
  for (int i = 0; i < n_cases; ++i) {
    PhantomSpec s = spec;
    s.seed = seed + static_cast<std::uint64_t>(i);
    out.push_back(generate_phantom(s));
  }
  return out;
}

}  // namespace ribcage

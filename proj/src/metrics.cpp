#include "ribcage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ribcage {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(const Mask& a, const Mask& b, const char* op) {
  if (a.dims() != b.dims()) {
    throw ShapeError(std::string(op) + ": dimension mismatch " + to_string(a.dims()) + " vs " +
                     to_string(b.dims()));
  }
}

// One-dimensional squared distance transform of a sampled function `f`
// (infinite entries are absent sites) along a strided line:
//   out(q) = min_p w (q - p)^2 + f(p).
// Lower envelope of parabolas; only finite sites enter the envelope.
class LineTransform {
 public:
  explicit LineTransform(std::size_t n) : f_(n), sites_(n), bounds_(n + 1) {}

  void run(double* data, std::size_t n, std::size_t stride, double w) {
    for (std::size_t i = 0; i < n; ++i) f_[i] = data[i * stride];

    std::size_t k = 0;
    bool any = false;
    for (std::size_t q = 0; q < n; ++q) {
      if (f_[q] == kInf) continue;
      if (!any) {
        sites_[0] = q;
        bounds_[0] = -kInf;
        bounds_[1] = kInf;
        k = 0;
        any = true;
        continue;
      }
      double s = intersect(q, sites_[k], w);
      while (s <= bounds_[k]) {
        --k;
        s = intersect(q, sites_[k], w);
      }
      ++k;
      sites_[k] = q;
      bounds_[k] = s;
      bounds_[k + 1] = kInf;
    }
    if (!any) return;

    k = 0;
    for (std::size_t q = 0; q < n; ++q) {
      const double qd = static_cast<double>(q);
      while (bounds_[k + 1] < qd) ++k;
      const double d = qd - static_cast<double>(sites_[k]);
      data[q * stride] = w * (d * d) + f_[sites_[k]];
    }
  }

 private:
  double intersect(std::size_t q, std::size_t p, double w) const {
    const double qd = static_cast<double>(q), pd = static_cast<double>(p);
    return ((f_[q] + w * qd * qd) - (f_[p] + w * pd * pd)) / (2.0 * w * (qd - pd));
  }

  std::vector<double> f_;
  std::vector<std::size_t> sites_;
  std::vector<double> bounds_;
};

std::vector<double> directed_distances_sq(const Mask& a, const std::vector<double>& dist_b) {
  std::vector<double> out;
  out.reserve(a.count());
  for (std::size_t i = 0; i < dist_b.size(); ++i) {
    if (a.test(i)) out.push_back(dist_b[i]);
  }
  return out;
}

double nearest_rank(std::vector<double> values, double percentile) {
  if (percentile >= 100.0) return *std::max_element(values.begin(), values.end());
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   values.end());
  return values[rank - 1];
}

}  // namespace

double dsc(const Mask& a, const Mask& b) {
  check_pair(a, b, "dsc");
  std::size_t inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.volume().size(); ++i) {
    const bool x = a.test(i), y = b.test(i);
    na += x;
    nb += y;
    inter += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

std::vector<double> edt_squared(const Mask& m, const Spacing& spacing) {
  if (m.empty()) throw EmptySetError("edt: empty set (mask has no foreground voxels)");
  const Dims& d = m.dims();
  std::vector<double> dist(d.count());
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = m.test(i) ? 0.0 : kInf;

  const auto nx = static_cast<std::size_t>(d.x);
  const auto ny = static_cast<std::size_t>(d.y);
  const auto nz = static_cast<std::size_t>(d.z);
  LineTransform line(std::max({nx, ny, nz}));
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      line.run(&dist[(z * ny + y) * nx], nx, 1, spacing.x * spacing.x);
    }
  }
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t x = 0; x < nx; ++x) {
      line.run(&dist[z * ny * nx + x], ny, nx, spacing.y * spacing.y);
    }
  }
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      line.run(&dist[y * nx + x], nz, nx * ny, spacing.z * spacing.z);
    }
  }
  return dist;
}

Volume edt(const Mask& m, const Spacing& spacing) {
  auto sq = edt_squared(m, spacing);
  for (double& v : sq) v = std::sqrt(v);
  return Volume(m.dims(), spacing, ValueDomain::Unbounded, std::move(sq));
}

double directed_hausdorff(const Mask& a, const Mask& b, const Spacing& spacing) {
  check_pair(a, b, "directed_hausdorff");
  if (a.empty()) throw EmptySetError("directed_hausdorff: empty set (first operand)");
  const auto dist_b = edt_squared(b, spacing);
  double worst = 0.0;
  for (std::size_t i = 0; i < dist_b.size(); ++i) {
    if (a.test(i)) worst = std::max(worst, dist_b[i]);
  }
  return std::sqrt(worst);
}

double hausdorff(const Mask& a, const Mask& b, const Spacing& spacing) {
  return std::max(directed_hausdorff(a, b, spacing), directed_hausdorff(b, a, spacing));
}

double hausdorff_percentile(const Mask& a, const Mask& b, const Spacing& spacing,
                            double percentile) {
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw ConfigError("Hausdorff percentile must lie in (0, 100]");
  }
  check_pair(a, b, "hausdorff_percentile");
  if (a.empty() || b.empty()) throw EmptySetError("hausdorff_percentile: empty set");
  const double ab = nearest_rank(directed_distances_sq(a, edt_squared(b, spacing)), percentile);
  const double ba = nearest_rank(directed_distances_sq(b, edt_squared(a, spacing)), percentile);
  return std::sqrt(std::max(ab, ba));
}

double brute_force_hausdorff(const Mask& a, const Mask& b, const Spacing& spacing) {
  check_pair(a, b, "brute_force_hausdorff");
  if (a.empty() || b.empty()) throw EmptySetError("brute_force_hausdorff: empty set");
  auto points = [](const Mask& m) {
    std::vector<Index3> pts;
    const Dims& d = m.dims();
    for (int z = 0; z < d.z; ++z)
      for (int y = 0; y < d.y; ++y)
        for (int x = 0; x < d.x; ++x)
          if (m.test(x, y, z)) pts.push_back({x, y, z});
    return pts;
  };
  const auto pa = points(a);
  const auto pb = points(b);
  const double wx = spacing.x * spacing.x, wy = spacing.y * spacing.y, wz = spacing.z * spacing.z;
  auto directed = [&](const std::vector<Index3>& from, const std::vector<Index3>& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = kInf;
      for (const auto& q : to) {
        const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
        best = std::min(best, wx * (dx * dx) + wy * (dy * dy) + wz * (dz * dz));
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::sqrt(std::max(directed(pa, pb), directed(pb, pa)));
}

MetricReport compare_masks(const Mask& pred, const Mask& truth, const Spacing& spacing,
                           double hd_percentile) {
  MetricReport r;
  r.dsc = dsc(pred, truth);
  r.count_a = pred.count();
  r.count_b = truth.count();
  if (hd_percentile >= 100.0) {
    r.hd_ab = directed_hausdorff(pred, truth, spacing);
    r.hd_ba = directed_hausdorff(truth, pred, spacing);
  } else {
    if (pred.empty() || truth.empty()) throw EmptySetError("compare_masks: empty set");
    r.hd_ab = std::sqrt(nearest_rank(directed_distances_sq(pred, edt_squared(truth, spacing)),
                                     hd_percentile));
    r.hd_ba = std::sqrt(nearest_rank(directed_distances_sq(truth, edt_squared(pred, spacing)),
                                     hd_percentile));
  }
  r.hd = std::max(r.hd_ab, r.hd_ba);
  return r;
}

}  // namespace ribcage

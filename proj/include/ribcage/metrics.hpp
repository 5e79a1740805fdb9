#pragma once

#include <cstddef>
#include <vector>

#include "ribcage/volume.hpp"

namespace ribcage {

struct MetricReport {
  double dsc = 0.0;
  /// Hausdorff distance in millimetres, max of the two directed distances.
  double hd = 0.0;
  double hd_ab = 0.0;
  double hd_ba = 0.0;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
};

/// 2|a & b| / (|a| + |b|); two empty masks score 1.
double dsc(const Mask& a, const Mask& b);

/// Squared Euclidean distance (mm^2) from every voxel centre to the nearest
/// foreground voxel centre. Separable lower-envelope transform, one pass per
/// axis weighted by spacing^2. Throws EmptySetError for an empty mask.
std::vector<double> edt_squared(const Mask& m, const Spacing& spacing);

/// sqrt of edt_squared as an Unbounded volume (millimetres).
Volume edt(const Mask& m, const Spacing& spacing);

/// Largest distance from a foreground voxel of `a` to the nearest foreground
/// voxel of `b`. Throws EmptySetError if either mask is empty.
double directed_hausdorff(const Mask& a, const Mask& b, const Spacing& spacing);

/// max(directed(a, b), directed(b, a)).
double hausdorff(const Mask& a, const Mask& b, const Spacing& spacing);

/// Percentile variant (nearest rank over each direction's distances, then
/// the max of both directions). percentile = 100 equals hausdorff().
double hausdorff_percentile(const Mask& a, const Mask& b, const Spacing& spacing,
                            double percentile);

/// O(|a| * |b|) pairwise reference, used to cross-check hausdorff().
double brute_force_hausdorff(const Mask& a, const Mask& b, const Spacing& spacing);

/// DSC plus both directed distances. `hd_percentile` < 100 switches hd,
/// hd_ab and hd_ba to the percentile variant.
MetricReport compare_masks(const Mask& pred, const Mask& truth, const Spacing& spacing,
                           double hd_percentile = 100.0);

}  // namespace ribcage

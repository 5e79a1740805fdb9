#pragma once

#include <cstdint>
#include <utility>

#include "ribcage/manifest.hpp"
#include "ribcage/volume.hpp"

namespace ribcage {

/// Placement rules for the simulated resection cuboid. `size` is given on
/// the grid the mask is built on; `band_lo`/`band_hi` are fractions of the
/// z (height) extent bounding the cuboid's start coordinate.
struct DefectSpec {
  Dims size{64, 64, 64};
  double band_lo = 0.5;
  double band_hi = 0.75;
  std::uint64_t seed = 0;
  int max_attempts = 32;
  /// Minimum fraction of the cuboid that must be bone.
  double min_bone_fraction = 0.01;
};

/// One training sample. `defective` is R_d and `implant` is I_g, both binary
/// Unit volumes on the working grid; `defect_mask` is M_d.
struct TrainingCase {
  Volume defective;
  Volume implant;
  Box defect;
  Mask defect_mask;
  std::uint64_t seed = 0;
};

/// Start range of the cuboid along z after clamping so it fits: the
/// inclusive interval [lo, hi].
std::pair<int, int> clamped_height_band(int depth, int size, double band_lo, double band_hi);

/// Clamp the window to [lo, hi] HU, then map affinely to [0, 1].
Volume normalize_ct(const Volume& ct, double lo_hu, double hi_hu);

/// S_g: 1 where ct >= hu_threshold.
Mask threshold_bone(const Volume& ct, double hu_threshold);

/// All-ones mask with a zero cuboid. The z start is drawn uniformly from the
/// height band and clamped; x and y starts are uniform over the valid range.
/// Placements are redrawn until the cuboid covers the minimum bone count.
std::pair<Mask, Box> make_defect_mask(const Dims& dims, const Mask& bone, const DefectSpec& spec);

/// I_g = (1 - M_d) * S_g and R_d = M_d * S_g. Throws EmptySetError when the
/// implant has no voxels.
TrainingCase split_case(const Mask& bone, const Mask& defect_mask, const Box& box,
                        std::uint64_t seed = 0);

struct PipelineConfig {
  double hu_threshold = 200.0;
  double window_lo = -1024.0;
  double window_hi = 2048.0;
  Dims working_dims{64, 64, 32};
  /// Grid on which `reference_defect` is specified; the defect is scaled
  /// by working_dims / reference_dims per axis.
  Dims reference_dims{256, 256, 128};
  Dims reference_defect{64, 64, 64};
  double band_lo = 0.5;
  double band_hi = 0.75;
  int max_attempts = 32;
  double min_bone_fraction = 0.01;
  std::uint64_t seed = 0;

  PrepRecord record() const;
};

/// reference_defect scaled to the working grid (rounded, at least 1 voxel,
/// at most the working extent).
Dims scaled_defect_size(const PipelineConfig& cfg);

struct PreparedCase {
  /// Normalised CT resampled onto the working grid.
  Volume ct;
  /// S_g on the working grid.
  Mask bone;
  TrainingCase sample;
};

/// threshold -> resize to working grid -> re-binarize at 0.5 -> defect mask
/// -> split.
PreparedCase prepare_case(const Volume& ct, const PipelineConfig& cfg);

}  // namespace ribcage

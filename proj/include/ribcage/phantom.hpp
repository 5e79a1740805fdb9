#pragma once

#include <cstdint>
#include <vector>

#include "ribcage/volume.hpp"

namespace ribcage {

/// Parametric thoracic phantom. Geometry is expressed in voxel units on the
/// phantom grid; x is left/right, y posterior (low) to anterior (high), z the
/// height axis along which rib pairs are stacked.
struct PhantomSpec {
  Dims dims{128, 128, 128};
  Spacing spacing{1.0, 1.0, 1.0};
  int rib_pairs = 12;
  double rib_radius = 2.0;
  double torso_semi_x = 54.0;
  double torso_semi_y = 42.0;
  double bone_hu = 700.0;
  double soft_tissue_hu = 40.0;
  double background_hu = -1000.0;
  /// Per-rib random offset amplitude (voxels) for height and curve semi-axes.
  double jitter = 1.0;
  std::uint64_t seed = 0;
};

/// Throws ConfigError for invalid parameters and ShapeError when the grid
/// is too small to hold the torso or a rib tube.
void validate(const PhantomSpec& spec);

/// The set of voxels the generator paints with bone intensity.
Mask phantom_bone_stencil(const PhantomSpec& spec);

/// HU-domain phantom: background outside the torso ellipse, soft tissue
/// inside, bone on ribs, spine and sternum. Same spec gives identical bits.
Volume generate_phantom(const PhantomSpec& spec);

/// Case i is generate_phantom with seed = seed + i.
std::vector<Volume> generate_dataset(const PhantomSpec& spec, int n_cases, std::uint64_t seed);

}  // namespace ribcage

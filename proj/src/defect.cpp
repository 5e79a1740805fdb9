#include "ribcage/defect.hpp"

#include <algorithm>
#include <cmath>

#include "ribcage/rng.hpp"

namespace ribcage {

std::pair<int, int> clamped_height_band(int depth, int size, double band_lo, double band_hi) {
  const int max_start = depth - size;
  const int lo = static_cast<int>(std::ceil(band_lo * depth));
  const int hi = std::max(lo, static_cast<int>(std::floor(band_hi * depth)));
  return {std::min(lo, max_start), std::min(hi, max_start)};
}

Volume normalize_ct(const Volume& ct, double lo_hu, double hi_hu) {
  if (!(lo_hu < hi_hu) || !std::isfinite(lo_hu) || !std::isfinite(hi_hu)) {
    throw ConfigError("normalization window must satisfy lo < hi");
  }
  const double width = hi_hu - lo_hu;
  std::vector<double> out(ct.size());
  const auto in = ct.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::isnan(in[i])) throw DomainError("normalize_ct: NaN at voxel " + std::to_string(i));
    out[i] = (std::clamp(in[i], lo_hu, hi_hu) - lo_hu) / width;
  }
  return Volume(ct.dims(), ct.spacing(), ValueDomain::Unit, std::move(out));
}

Mask threshold_bone(const Volume& ct, double hu_threshold) {
  if (ct.domain() != ValueDomain::HU) {
    throw DomainError(std::string("threshold_bone expects an HU volume, got ") +
                      to_string(ct.domain()));
  }
  return binarize(ct, hu_threshold);
}

namespace {

std::size_t bone_in_box(const Mask& bone, const Box& box) {
  std::size_t n = 0;
  for (int z = box.origin.z; z < box.origin.z + box.size.z; ++z) {
    for (int y = box.origin.y; y < box.origin.y + box.size.y; ++y) {
      for (int x = box.origin.x; x < box.origin.x + box.size.x; ++x) n += bone.test(x, y, z);
    }
  }
  return n;
}

}  // namespace

std::pair<Mask, Box> make_defect_mask(const Dims& dims, const Mask& bone, const DefectSpec& spec) {
  if (bone.dims() != dims) {
    throw ShapeError("make_defect_mask: bone mask dims " + to_string(bone.dims()) +
                     " differ from " + to_string(dims));
  }
  if (!(spec.band_lo >= 0.0 && spec.band_lo < spec.band_hi && spec.band_hi <= 1.0)) {
    throw ConfigError("height band must satisfy 0 <= lo < hi <= 1");
  }
  if (!spec.size.positive()) throw ConfigError("defect size must be positive");
  if (spec.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  if (!(spec.min_bone_fraction >= 0.0 && spec.min_bone_fraction <= 1.0)) {
    throw ConfigError("min_bone_fraction must lie in [0, 1]");
  }
  if (bone.empty()) throw EmptySetError("make_defect_mask: bone mask is empty");

  const Dims size{std::min(spec.size.x, dims.x), std::min(spec.size.y, dims.y),
                  std::min(spec.size.z, dims.z)};
  const auto [z_lo, z_hi] = clamped_height_band(dims.z, size.z, spec.band_lo, spec.band_hi);
  const auto min_bone = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(spec.min_bone_fraction * static_cast<double>(size.count()))));

  Rng rng(spec.seed);
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    const Index3 origin{static_cast<int>(rng.uniform_int(0, dims.x - size.x)),
                        static_cast<int>(rng.uniform_int(0, dims.y - size.y)),
                        static_cast<int>(rng.uniform_int(z_lo, z_hi))};
    const Box box{origin, size};
    if (bone_in_box(bone, box) < min_bone) continue;

    std::vector<double> m(dims.count(), 1.0);
    for (int z = origin.z; z < origin.z + size.z; ++z) {
      for (int y = origin.y; y < origin.y + size.y; ++y) {
        const std::size_t row = (static_cast<std::size_t>(z) * dims.y + y) * dims.x;
        std::fill_n(m.begin() + static_cast<std::ptrdiff_t>(row + origin.x), size.x, 0.0);
      }
    }
    return {Mask(Volume(dims, bone.spacing(), ValueDomain::Unit, std::move(m))), box};
  }
  throw PlacementError(spec.max_attempts,
                       "no valid placement after " + std::to_string(spec.max_attempts) +
                           " attempts (need >= " + std::to_string(min_bone) +
                           " bone voxels in the defect)");
}

TrainingCase split_case(const Mask& bone, const Mask& defect_mask, const Box& box,
                        std::uint64_t seed) {
  if (bone.dims() != defect_mask.dims()) {
    throw ShapeError("split_case: dims " + to_string(bone.dims()) + " vs " +
                     to_string(defect_mask.dims()));
  }
  const Volume implant_mask = complement(defect_mask.volume());
  Volume implant = elementwise_mul(implant_mask, bone.volume());
  Volume defective = elementwise_mul(defect_mask.volume(), bone.volume());
  if (sum(implant) == 0.0) {
    throw EmptySetError("split_case: empty implant (no bone inside the defect)");
  }
  return TrainingCase{std::move(defective), std::move(implant), box, defect_mask, seed};
}

PrepRecord PipelineConfig::record() const {
  PrepRecord r;
  r.hu_threshold = hu_threshold;
  r.window_lo = window_lo;
  r.window_hi = window_hi;
  r.band_lo = band_lo;
  r.band_hi = band_hi;
  r.min_bone_fraction = min_bone_fraction;
  r.max_attempts = max_attempts;
  r.reference_dims = reference_dims;
  r.reference_defect = reference_defect;
  return r;
}

Dims scaled_defect_size(const PipelineConfig& cfg) {
  if (!cfg.working_dims.positive() || !cfg.reference_dims.positive() ||
      !cfg.reference_defect.positive()) {
    throw ConfigError("working, reference and defect dims must be positive");
  }
  auto scale = [](int size, int work, int ref) {
    const int s = static_cast<int>(std::lround(static_cast<double>(size) * work / ref));
    return std::clamp(s, 1, work);
  };
  return {scale(cfg.reference_defect.x, cfg.working_dims.x, cfg.reference_dims.x),
          scale(cfg.reference_defect.y, cfg.working_dims.y, cfg.reference_dims.y),
          scale(cfg.reference_defect.z, cfg.working_dims.z, cfg.reference_dims.z)};
}

PreparedCase prepare_case(const Volume& ct, const PipelineConfig& cfg) {
  const Mask full_bone = threshold_bone(ct, cfg.hu_threshold);
  const Mask bone = binarize(trilinear_resize(full_bone.volume(), cfg.working_dims), 0.5);
  Volume ct_work = trilinear_resize(normalize_ct(ct, cfg.window_lo, cfg.window_hi), cfg.working_dims);

  DefectSpec spec;
  spec.size = scaled_defect_size(cfg);
  spec.band_lo = cfg.band_lo;
  spec.band_hi = cfg.band_hi;
  spec.seed = cfg.seed;
  spec.max_attempts = cfg.max_attempts;
  spec.min_bone_fraction = cfg.min_bone_fraction;
  auto [defect_mask, box] = make_defect_mask(cfg.working_dims, bone, spec);
  TrainingCase sample = split_case(bone, defect_mask, box, cfg.seed);
  return PreparedCase{std::move(ct_work), bone, std::move(sample)};
}

}  // namespace ribcage

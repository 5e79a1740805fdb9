#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "ribcage/volume.hpp"

namespace ribcage {

// Single-file NIfTI-1 subset: 348-byte little-endian header, four zero
// extension bytes, voxel payload at offset 352. Only float32 (code 16) and
// uint8 (code 2) payloads with dim[0] = 3 are supported; qform/sform are
// written as zero and ignored on read.

enum class VoxelType : std::int16_t { UInt8 = 2, Float32 = 16 };

const char* to_string(VoxelType t) noexcept;
VoxelType parse_voxel_type(const std::string& s);

struct VolumeHeader {
  static constexpr std::int32_t kHeaderSize = 348;
  static constexpr std::int32_t kDataOffset = 352;

  Dims dims;
  Spacing spacing;
  VoxelType datatype = VoxelType::Float32;
  std::int32_t data_offset = kDataOffset;

  friend bool operator==(const VolumeHeader&, const VolumeHeader&) = default;
};

/// uint8 payloads come back as Unit-domain volumes (value / 255). float32
/// payloads recover the domain tag stored in the header's description field
/// and fall back to Unbounded when it is absent.
std::pair<Volume, VolumeHeader> read_volume(const std::filesystem::path& path);

/// float32 stores values as single precision; uint8 requires a Unit-domain
/// volume and quantises with round-half-up of v * 255. Spacing is stored as
/// single precision in pixdim.
void write_volume(const std::filesystem::path& path, const Volume& v, VoxelType datatype);

}  // namespace ribcage

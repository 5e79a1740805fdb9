#include "ribcage/nifti.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>
#include <vector>

#include "bytes.hpp"

namespace ribcage {

const char* to_string(VoxelType t) noexcept {
  return t == VoxelType::UInt8 ? "uint8" : "float32";
}

VoxelType parse_voxel_type(const std::string& s) {
  if (s == "uint8") return VoxelType::UInt8;
  if (s == "float32") return VoxelType::Float32;
  throw ConfigError("unsupported voxel type '" + s + "' (expected float32 or uint8)");
}

namespace {

// Byte offsets inside the 348-byte header.
constexpr std::size_t kOffSizeofHdr = 0;
constexpr std::size_t kOffRegular = 38;
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffDescrip = 148;
constexpr std::size_t kDescripLen = 80;
constexpr std::size_t kOffMagic = 344;
constexpr std::array<char, 4> kMagic = {'n', '+', '1', '\0'};
constexpr std::string_view kDomainTag = "ribcage domain=";

template <typename T>
void put_le(std::vector<unsigned char>& buf, std::size_t off, T value) {
  detail::put_le<T>(buf.data() + off, value);
}

using detail::get_le;

int bytes_per_voxel(VoxelType t) { return t == VoxelType::UInt8 ? 1 : 4; }

}  // namespace

void write_volume(const std::filesystem::path& path, const Volume& v, VoxelType datatype) {
  if (datatype != VoxelType::Float32 && datatype != VoxelType::UInt8) {
    throw ConfigError("unsupported datatype code " + std::to_string(static_cast<int>(datatype)));
  }
  if (datatype == VoxelType::UInt8 && v.domain() != ValueDomain::Unit) {
    throw DomainError(std::string("uint8 output requires a unit-domain volume, got ") +
                      to_string(v.domain()));
  }
  const Dims& d = v.dims();
  for (int n : {d.x, d.y, d.z}) {
    if (n > 32767) throw ShapeError("dimension exceeds NIfTI-1 int16 limit: " + to_string(d));
  }

  const std::size_t payload = v.size() * static_cast<std::size_t>(bytes_per_voxel(datatype));
  std::vector<unsigned char> buf(VolumeHeader::kDataOffset + payload, 0);

  put_le<std::int32_t>(buf, kOffSizeofHdr, VolumeHeader::kHeaderSize);
  buf[kOffRegular] = 'r';
  const std::array<std::int16_t, 8> dim = {3, static_cast<std::int16_t>(d.x),
                                           static_cast<std::int16_t>(d.y),
                                           static_cast<std::int16_t>(d.z), 1, 1, 1, 1};
  for (std::size_t i = 0; i < dim.size(); ++i) put_le<std::int16_t>(buf, kOffDim + 2 * i, dim[i]);
  put_le<std::int16_t>(buf, kOffDatatype, static_cast<std::int16_t>(datatype));
  put_le<std::int16_t>(buf, kOffBitpix, static_cast<std::int16_t>(8 * bytes_per_voxel(datatype)));
  const std::array<float, 8> pixdim = {1.0f,
                                       static_cast<float>(v.spacing().x),
                                       static_cast<float>(v.spacing().y),
                                       static_cast<float>(v.spacing().z),
                                       1.0f, 1.0f, 1.0f, 1.0f};
  for (std::size_t i = 0; i < pixdim.size(); ++i) put_le<float>(buf, kOffPixdim + 4 * i, pixdim[i]);
  put_le<float>(buf, kOffVoxOffset, static_cast<float>(VolumeHeader::kDataOffset));
  buf[kOffXyztUnits] = 2;  // millimetres

  const std::string descrip = std::string(kDomainTag) + to_string(v.domain());
  std::memcpy(&buf[kOffDescrip], descrip.data(), std::min(descrip.size(), kDescripLen - 1));
  std::memcpy(&buf[kOffMagic], kMagic.data(), kMagic.size());

  const auto values = v.values();
  std::size_t off = VolumeHeader::kDataOffset;
  if (datatype == VoxelType::Float32) {
    for (double x : values) {
      put_le<float>(buf, off, static_cast<float>(x));
      off += 4;
    }
  } else {
    for (double x : values) buf[off++] = static_cast<unsigned char>(std::floor(x * 255.0 + 0.5));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(path.string(), "failed writing '" + path.string() + "'");
}

std::pair<Volume, VolumeHeader> read_volume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open '" + path.string() + "'");
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  const std::string where = " in '" + path.string() + "'";

  if (buf.size() < static_cast<std::size_t>(VolumeHeader::kHeaderSize) ||
      get_le<std::int32_t>(&buf[kOffSizeofHdr]) != VolumeHeader::kHeaderSize) {
    throw FormatError("sizeof_hdr", "malformed header: sizeof_hdr is not 348" + where);
  }
  if (std::memcmp(&buf[kOffMagic], kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("magic", "bad magic (expected \"n+1\\0\")" + where);
  }
  std::array<std::int16_t, 8> dim{};
  for (std::size_t i = 0; i < dim.size(); ++i) dim[i] = get_le<std::int16_t>(&buf[kOffDim + 2 * i]);
  if (dim[0] != 3) {
    throw FormatError("dim", "dim[0] must be 3, got " + std::to_string(dim[0]) + where);
  }
  const Dims dims{dim[1], dim[2], dim[3]};
  if (!dims.positive()) throw FormatError("dim", "non-positive dimension " + to_string(dims) + where);

  const auto code = get_le<std::int16_t>(&buf[kOffDatatype]);
  if (code != static_cast<std::int16_t>(VoxelType::Float32) &&
      code != static_cast<std::int16_t>(VoxelType::UInt8)) {
    throw FormatError("datatype", "unsupported datatype code " + std::to_string(code) + where);
  }
  const auto datatype = static_cast<VoxelType>(code);
  if (get_le<std::int16_t>(&buf[kOffBitpix]) != 8 * bytes_per_voxel(datatype)) {
    throw FormatError("bitpix", "bitpix does not match datatype" + where);
  }

  const Spacing spacing{get_le<float>(&buf[kOffPixdim + 4]), get_le<float>(&buf[kOffPixdim + 8]),
                        get_le<float>(&buf[kOffPixdim + 12])};
  for (double s : {spacing.x, spacing.y, spacing.z}) {
    if (!std::isfinite(s) || s <= 0.0) throw FormatError("pixdim", "non-positive voxel spacing" + where);
  }
  if (get_le<float>(&buf[kOffVoxOffset]) != static_cast<float>(VolumeHeader::kDataOffset)) {
    throw FormatError("vox_offset", "vox_offset must be 352" + where);
  }

  const std::size_t n = dims.count();
  const std::size_t need =
      VolumeHeader::kDataOffset + n * static_cast<std::size_t>(bytes_per_voxel(datatype));
  if (buf.size() < need) {
    throw FormatError("payload", "truncated payload: expected " + std::to_string(need) +
                                     " bytes, found " + std::to_string(buf.size()) + where);
  }

  std::vector<double> data(n);
  ValueDomain domain = ValueDomain::Unit;
  if (datatype == VoxelType::Float32) {
    for (std::size_t i = 0; i < n; ++i) {
      data[i] = get_le<float>(&buf[VolumeHeader::kDataOffset + 4 * i]);
    }
    const char* d = reinterpret_cast<const char*>(&buf[kOffDescrip]);
    const std::string descrip(d, strnlen(d, kDescripLen));
    domain = ValueDomain::Unbounded;
    if (descrip.starts_with(kDomainTag)) {
      try {
        domain = parse_value_domain(descrip.substr(kDomainTag.size()));
      } catch (const ConfigError&) {
        throw FormatError("descrip", "unknown domain tag '" + descrip + "'" + where);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) data[i] = buf[VolumeHeader::kDataOffset + i] / 255.0;
  }

  VolumeHeader header{dims, spacing, datatype, VolumeHeader::kDataOffset};
  return {Volume(dims, spacing, domain, std::move(data)), header};
}

}  // namespace ribcage

#pragma once

#include <filesystem>

#include "ribcage/adam.hpp"
#include "ribcage/micronet.hpp"

namespace ribcage {

/// Binary snapshot of the network and optimizer state. Little-endian,
/// float64 payloads, so a reload resumes bit-exactly.
struct Checkpoint {
  NetParams params;
  OptState opt;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws FormatError on a bad magic, unknown version, truncation or a
/// tensor layout that does not match the stored network configuration.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace ribcage

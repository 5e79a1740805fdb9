#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ribcage/volume.hpp"

namespace ribcage {

/// Preprocessing settings recorded alongside a prepared case.
struct PrepRecord {
  double hu_threshold = 200.0;
  double window_lo = -1024.0;
  double window_hi = 2048.0;
  double band_lo = 0.5;
  double band_hi = 0.75;
  double min_bone_fraction = 0.01;
  int max_attempts = 32;
  Dims reference_dims{256, 256, 128};
  Dims reference_defect{64, 64, 64};

  friend bool operator==(const PrepRecord&, const PrepRecord&) = default;
};

/// Everything needed to reload one prepared case. Volume paths are stored
/// verbatim; relative ones resolve against the manifest's directory.
struct CaseManifest {
  std::string case_id;
  std::uint64_t seed = 0;
  std::string source;
  std::string ct;
  std::string bone_mask;
  std::string defective;
  std::string implant;
  Dims dims;
  Box defect;
  PrepRecord prep;

  friend bool operator==(const CaseManifest&, const CaseManifest&) = default;
};

// Text format: UTF-8, one `key = value` per line, `#` starts a comment.
// Triples are written as three space-separated numbers.

void write_manifest(const std::filesystem::path& path, const CaseManifest& m);

/// Rejects unknown keys, reports the first missing key by name, checks that
/// the defect box lies inside `dims` and that every referenced volume exists.
CaseManifest read_manifest(const std::filesystem::path& path);

/// Resolves a path stored in a manifest or list file located at `owner`.
std::filesystem::path resolve_relative(const std::filesystem::path& owner,
                                       const std::string& stored);

/// One path per line, relative to the list file's directory. `#` comments
/// and blank lines are ignored.
void write_path_list(const std::filesystem::path& path, const std::vector<std::string>& entries);
std::vector<std::filesystem::path> read_path_list(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace ribcage

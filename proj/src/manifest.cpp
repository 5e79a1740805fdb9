#include "ribcage/manifest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace ribcage {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

class Fields {
 public:
  Fields(std::map<std::string, std::string> kv, std::string where)
      : kv_(std::move(kv)), where_(std::move(where)) {}

  const std::string& str(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw FormatError(key, "missing required key '" + key + "'" + where_);
    return it->second;
  }

  double real(const std::string& key) const { return parse_double(key, str(key)); }

  template <typename Int>
  Int integer(const std::string& key) const {
    const std::string& s = str(key);
    Int v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw FormatError(key, "invalid integer for '" + key + "': '" + s + "'" + where_);
    }
    return v;
  }

  std::array<int, 3> triple(const std::string& key) const {
    const auto toks = split_ws(str(key));
    if (toks.size() != 3) throw FormatError(key, "'" + key + "' needs three integers" + where_);
    std::array<int, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto res = std::from_chars(toks[i].data(), toks[i].data() + toks[i].size(), out[i]);
      if (res.ec != std::errc{} || res.ptr != toks[i].data() + toks[i].size()) {
        throw FormatError(key, "invalid integer in '" + key + "'" + where_);
      }
    }
    return out;
  }

 private:
  double parse_double(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw FormatError(key, "invalid number for '" + key + "': '" + s + "'" + where_);
    }
    return v;
  }

  std::map<std::string, std::string> kv_;
  std::string where_;
};

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "case_id",     "seed",           "source",           "ct",
      "bone_mask",   "defective",      "implant",          "dims",
      "defect_origin", "defect_size",  "hu_threshold",     "window_lo",
      "window_hi",   "band_lo",        "band_hi",          "min_bone_fraction",
      "max_attempts", "reference_dims", "reference_defect"};
  return keys;
}

std::string triple_text(int a, int b, int c) {
  return std::to_string(a) + " " + std::to_string(b) + " " + std::to_string(c);
}

Dims to_dims(const std::array<int, 3>& t) { return {t[0], t[1], t[2]}; }

}  // namespace

std::filesystem::path resolve_relative(const std::filesystem::path& owner,
                                       const std::string& stored) {
  const std::filesystem::path p(stored);
  if (p.is_absolute()) return p;
  return owner.parent_path() / p;
}

void write_manifest(const std::filesystem::path& path, const CaseManifest& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open '" + path.string() + "' for writing");
  const auto& p = m.prep;
  out << "# ribcage prepared case\n"
      << "case_id = " << m.case_id << "\n"
      << "seed = " << m.seed << "\n"
      << "source = " << m.source << "\n"
      << "ct = " << m.ct << "\n"
      << "bone_mask = " << m.bone_mask << "\n"
      << "defective = " << m.defective << "\n"
      << "implant = " << m.implant << "\n"
      << "dims = " << triple_text(m.dims.x, m.dims.y, m.dims.z) << "\n"
      << "defect_origin = "
      << triple_text(m.defect.origin.x, m.defect.origin.y, m.defect.origin.z) << "\n"
      << "defect_size = " << triple_text(m.defect.size.x, m.defect.size.y, m.defect.size.z)
      << "\n"
      << "hu_threshold = " << format_double(p.hu_threshold) << "\n"
      << "window_lo = " << format_double(p.window_lo) << "\n"
      << "window_hi = " << format_double(p.window_hi) << "\n"
      << "band_lo = " << format_double(p.band_lo) << "\n"
      << "band_hi = " << format_double(p.band_hi) << "\n"
      << "min_bone_fraction = " << format_double(p.min_bone_fraction) << "\n"
      << "max_attempts = " << p.max_attempts << "\n"
      << "reference_dims = "
      << triple_text(p.reference_dims.x, p.reference_dims.y, p.reference_dims.z) << "\n"
      << "reference_defect = "
      << triple_text(p.reference_defect.x, p.reference_defect.y, p.reference_defect.z) << "\n";
  if (!out) throw IoError(path.string(), "failed writing '" + path.string() + "'");
}

CaseManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open manifest '" + path.string() + "'");
  const std::string where = " in '" + path.string() + "'";

  std::map<std::string, std::string> kv;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("line " + std::to_string(lineno),
                        "expected 'key = value' on line " + std::to_string(lineno) + where);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw FormatError(key, "unknown key '" + key + "'" + where);
    }
    if (!kv.emplace(key, value).second) {
      throw FormatError(key, "duplicate key '" + key + "'" + where);
    }
  }

  const Fields f(std::move(kv), where);
  CaseManifest m;
  m.case_id = f.str("case_id");
  m.seed = f.integer<std::uint64_t>("seed");
  m.source = f.str("source");
  m.ct = f.str("ct");
  m.bone_mask = f.str("bone_mask");
  m.defective = f.str("defective");
  m.implant = f.str("implant");
  m.dims = to_dims(f.triple("dims"));
  const auto o = f.triple("defect_origin");
  m.defect = Box{{o[0], o[1], o[2]}, to_dims(f.triple("defect_size"))};
  m.prep.hu_threshold = f.real("hu_threshold");
  m.prep.window_lo = f.real("window_lo");
  m.prep.window_hi = f.real("window_hi");
  m.prep.band_lo = f.real("band_lo");
  m.prep.band_hi = f.real("band_hi");
  m.prep.min_bone_fraction = f.real("min_bone_fraction");
  m.prep.max_attempts = f.integer<int>("max_attempts");
  m.prep.reference_dims = to_dims(f.triple("reference_dims"));
  m.prep.reference_defect = to_dims(f.triple("reference_defect"));

  if (!m.dims.positive()) throw FormatError("dims", "dims must be positive" + where);
  if (!m.defect.fits_in(m.dims)) {
    throw FormatError("defect_origin", "defect box extends past dims " + to_string(m.dims) + where);
  }
  for (const std::string* p : {&m.ct, &m.bone_mask, &m.defective, &m.implant}) {
    const auto resolved = resolve_relative(path, *p);
    if (!std::filesystem::exists(resolved)) {
      throw IoError(resolved.string(), "manifest references missing file '" +
                                           resolved.string() + "'" + where);
    }
  }
  return m;
}

void write_path_list(const std::filesystem::path& path, const std::vector<std::string>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open '" + path.string() + "' for writing");
  for (const auto& e : entries) out << e << "\n";
  if (!out) throw IoError(path.string(), "failed writing '" + path.string() + "'");
}

std::vector<std::filesystem::path> read_path_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open list '" + path.string() + "'");
  std::vector<std::filesystem::path> out;
  for (std::string line; std::getline(in, line);) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (!line.empty()) out.push_back(resolve_relative(path, line));
  }
  return out;
}

}  // namespace ribcage

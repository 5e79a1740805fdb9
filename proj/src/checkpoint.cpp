#include "ribcage/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "bytes.hpp"

namespace ribcage {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'I', 'B', 'C', 'K', 'P', 'T', '\0'};

using detail::append_le;

void append_doubles(std::vector<unsigned char>& buf, const std::vector<double>& xs) {
  append_le<std::uint64_t>(buf, xs.size());
  for (double x : xs) append_le<double>(buf, x);
}

class Reader {
 public:
  Reader(const std::vector<unsigned char>& buf, std::string where)
      : buf_(buf), where_(std::move(where)) {}

  template <typename T>
  T get(const char* field) {
    need(sizeof(T), field);
    const T v = detail::get_le<T>(buf_.data() + pos_);
    pos_ += sizeof(T);
    return v;
  }

  std::string bytes(std::size_t n, const char* field) {
    need(n, field);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::vector<double> doubles(const char* field) {
    const auto n = get<std::uint64_t>(field);
    if (n > (buf_.size() - pos_) / 8) truncated(field);
    std::vector<double> xs(n);
    for (auto& x : xs) x = get<double>(field);
    return xs;
  }

  bool at_end() const noexcept { return pos_ == buf_.size(); }
  const std::string& where() const noexcept { return where_; }

 private:
  void need(std::size_t n, const char* field) {
    if (buf_.size() - pos_ < n) truncated(field);
  }
  [[noreturn]] void truncated(const char* field) {
    throw FormatError(field, std::string("truncated checkpoint while reading ") + field + where_);
  }

  const std::vector<unsigned char>& buf_;
  std::size_t pos_ = 0;
  std::string where_;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  const auto& o = ckpt.opt;
  if (o.m.size() != p.tensors.size() || o.v.size() != p.tensors.size()) {
    throw ShapeError("checkpoint: optimizer moments do not match the parameter tensors");
  }
  std::vector<unsigned char> buf(kMagic.begin(), kMagic.end());
  append_le<std::uint32_t>(buf, kCheckpointVersion);
  append_le<std::int32_t>(buf, p.config.depth);
  append_le<std::int32_t>(buf, p.config.base_channels);
  append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(p.tensors.size()));
  for (const auto& t : p.tensors) {
    append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(t.name.size()));
    buf.insert(buf.end(), t.name.begin(), t.name.end());
    append_doubles(buf, t.values);
  }
  append_le<std::uint64_t>(buf, o.step);
  for (double x : {o.config.lr, o.config.beta1, o.config.beta2, o.config.eps,
                   o.config.weight_decay}) {
    append_le<double>(buf, x);
  }
  append_le<std::int32_t>(buf, o.config.batch_size);
  for (const auto& m : o.m) append_doubles(buf, m);
  for (const auto& v : o.v) append_doubles(buf, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(path.string(), "failed writing '" + path.string() + "'");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open '" + path.string() + "'");
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  Reader r(buf, " in '" + path.string() + "'");

  if (r.bytes(kMagic.size(), "magic") != std::string(kMagic.data(), kMagic.size())) {
    throw FormatError("magic", "not a checkpoint (bad magic)" + r.where());
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("version", "unsupported checkpoint version " + std::to_string(version) +
                                     r.where());
  }
  Checkpoint ck;
  ck.params.config.depth = r.get<std::int32_t>("depth");
  ck.params.config.base_channels = r.get<std::int32_t>("base_channels");
  try {
    validate(ck.params.config);
  } catch (const ConfigError& e) {
    throw FormatError("config", std::string(e.what()) + r.where());
  }
  const auto layout = conv_layout(ck.params.config);
  const auto count = r.get<std::uint32_t>("tensor_count");
  if (count != 2 * layout.size()) {
    throw FormatError("tensor_count", "expected " + std::to_string(2 * layout.size()) +
                                          " tensors, found " + std::to_string(count) + r.where());
  }
  const NetParams shape = zero_params(ck.params.config);
  for (std::uint32_t i = 0; i < count; ++i) {
    ParamTensor t;
    const auto len = r.get<std::uint32_t>("name");
    t.name = r.bytes(len, "name");
    t.values = r.doubles("values");
    const auto& want = shape.tensors[i];
    if (t.name != want.name || t.values.size() != want.values.size()) {
      throw FormatError("tensor", "tensor " + std::to_string(i) + " ('" + t.name +
                                      "') does not match layout '" + want.name + "'" + r.where());
    }
    ck.params.tensors.push_back(std::move(t));
  }

  ck.opt.step = r.get<std::uint64_t>("step");
  ck.opt.config.lr = r.get<double>("lr");
  ck.opt.config.beta1 = r.get<double>("beta1");
  ck.opt.config.beta2 = r.get<double>("beta2");
  ck.opt.config.eps = r.get<double>("eps");
  ck.opt.config.weight_decay = r.get<double>("weight_decay");
  ck.opt.config.batch_size = r.get<std::int32_t>("batch_size");
  for (auto* moments : {&ck.opt.m, &ck.opt.v}) {
    for (std::uint32_t i = 0; i < count; ++i) {
      moments->push_back(r.doubles("moments"));
      if (moments->back().size() != ck.params.tensors[i].values.size()) {
        throw FormatError("moments", "optimizer moment size mismatch for tensor '" +
                                         ck.params.tensors[i].name + "'" + r.where());
      }
    }
  }
  if (!r.at_end()) throw FormatError("trailing", "unexpected trailing bytes" + r.where());
  return ck;
}

}  // namespace ribcage

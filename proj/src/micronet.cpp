#include "ribcage/micronet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ribcage/rng.hpp"

namespace ribcage {

void validate(const NetConfig& cfg) {
  if (cfg.depth < 1 || cfg.depth > 6) throw ConfigError("net depth must lie in [1, 6]");
  if (cfg.base_channels < 1) throw ConfigError("base channel count must be >= 1");
}

std::vector<ConvShape> conv_layout(const NetConfig& cfg) {
  validate(cfg);
  const int c = cfg.base_channels;
  std::vector<ConvShape> out;
  for (int l = 0; l < cfg.depth; ++l) {
    out.push_back({"enc" + std::to_string(l), l == 0 ? 1 : c << (l - 1), c << l, 3});
  }
  out.push_back({"bottleneck", c << (cfg.depth - 1), c << cfg.depth, 3});
  for (int l = cfg.depth - 1; l >= 0; --l) {
    out.push_back({"dec" + std::to_string(l), (c << (l + 1)) + (c << l), c << l, 3});
  }
  out.push_back({"head", c, 1, 1});
  return out;
}

std::size_t NetParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.values.size();
  return n;
}

std::uint64_t NetParams::fingerprint() const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(&config.depth, sizeof(config.depth));
  mix(&config.base_channels, sizeof(config.base_channels));
  for (const auto& t : tensors) mix(t.values.data(), t.values.size() * sizeof(double));
  return h;
}

NetParams zero_params(const NetConfig& cfg) {
  NetParams p;
  p.config = cfg;
  for (const auto& s : conv_layout(cfg)) {
    p.tensors.push_back({s.name + ".weight", std::vector<double>(s.weight_count(), 0.0)});
    p.tensors.push_back(
        {s.name + ".bias", std::vector<double>(static_cast<std::size_t>(s.out_channels), 0.0)});
  }
  return p;
}

NetParams init_params(const NetConfig& cfg, std::uint64_t seed, double head_prior) {
  if (!(head_prior > 0.0 && head_prior < 1.0)) throw ConfigError("head prior must lie in (0, 1)");
  NetParams p = zero_params(cfg);
  Rng rng(seed);
  const auto layout = conv_layout(cfg);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& s = layout[i];
    const double fan_in = static_cast<double>(s.in_channels) * s.kernel * s.kernel * s.kernel;
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& w : p.tensors[2 * i].values) w = rng.uniform(-bound, bound);
  }
  p.tensors.back().values[0] = std::log(head_prior / (1.0 - head_prior));
  return p;
}

ParamGrads zero_grads(const NetParams& params) {
  ParamGrads g;
  g.reserve(params.tensors.size());
  for (const auto& t : params.tensors) g.emplace_back(t.values.size(), 0.0);
  return g;
}

namespace {

// ---------------------------------------------------------------------------
// Regions: inclusive voxel bounds, used to confine backward work to where
// gradients can be nonzero.

struct Region {
  int lo[3] = {0, 0, 0};
  int hi[3] = {-1, -1, -1};

  bool empty() const { return hi[0] < lo[0] || hi[1] < lo[1] || hi[2] < lo[2]; }
};

int extent(const Dims& d, int axis) { return axis == 0 ? d.x : axis == 1 ? d.y : d.z; }

Region dilate(const Region& r, int by, const Dims& d) {
  if (r.empty()) return r;
  Region out;
  for (int a = 0; a < 3; ++a) {
    out.lo[a] = std::max(0, r.lo[a] - by);
    out.hi[a] = std::min(extent(d, a) - 1, r.hi[a] + by);
  }
  return out;
}

Region coarsen(const Region& r) {
  if (r.empty()) return r;
  Region out;
  for (int a = 0; a < 3; ++a) {
    out.lo[a] = r.lo[a] / 2;
    out.hi[a] = r.hi[a] / 2;
  }
  return out;
}

Region refine(const Region& r) {
  if (r.empty()) return r;
  Region out;
  for (int a = 0; a < 3; ++a) {
    out.lo[a] = 2 * r.lo[a];
    out.hi[a] = 2 * r.hi[a] + 1;
  }
  return out;
}

Region unite(const Region& a, const Region& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  Region out;
  for (int i = 0; i < 3; ++i) {
    out.lo[i] = std::min(a.lo[i], b.lo[i]);
    out.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  return out;
}

Region nonzero_bounds(const std::vector<double>& g, const Dims& d) {
  Region r{{d.x, d.y, d.z}, {-1, -1, -1}};
  std::size_t i = 0;
  for (int z = 0; z < d.z; ++z) {
    for (int y = 0; y < d.y; ++y) {
      for (int x = 0; x < d.x; ++x, ++i) {
        if (g[i] == 0.0) continue;
        r.lo[0] = std::min(r.lo[0], x);
        r.hi[0] = std::max(r.hi[0], x);
        r.lo[1] = std::min(r.lo[1], y);
        r.hi[1] = std::max(r.hi[1], y);
        r.lo[2] = std::min(r.lo[2], z);
        r.hi[2] = std::max(r.hi[2], z);
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Layers. All feature maps are channel-major with x fastest.

Dims half(const Dims& d) { return {d.x / 2, d.y / 2, d.z / 2}; }

FeatureMap make_map(int channels, const Dims& d) {
  return FeatureMap{channels, d, std::vector<double>(static_cast<std::size_t>(channels) * d.count(), 0.0)};
}

// Zero-padded "same" convolution with an odd cubic kernel.
void conv_forward(const FeatureMap& in, const std::vector<double>& w, const std::vector<double>& b,
                  int cout, int k, FeatureMap& out) {
  const Dims& d = in.dims;
  const std::size_t n = d.count();
  const int r = k / 2;
  out = make_map(cout, d);
  for (int co = 0; co < cout; ++co) {
    double* op = out.data.data() + static_cast<std::size_t>(co) * n;
    std::fill(op, op + n, b[static_cast<std::size_t>(co)]);
    for (int ci = 0; ci < in.channels; ++ci) {
      const double* ip = in.data.data() + static_cast<std::size_t>(ci) * n;
      const double* wp = w.data() + (static_cast<std::size_t>(co) * in.channels + ci) * k * k * k;
      for (int kz = 0; kz < k; ++kz) {
        const int dz = kz - r;
        const int z0 = std::max(0, -dz), z1 = std::min(d.z, d.z - dz);
        for (int ky = 0; ky < k; ++ky) {
          const int dy = ky - r;
          const int y0 = std::max(0, -dy), y1 = std::min(d.y, d.y - dy);
          for (int kx = 0; kx < k; ++kx) {
            const int dx = kx - r;
            const int x0 = std::max(0, -dx), x1 = std::min(d.x, d.x - dx);
            const double wv = wp[(kz * k + ky) * k + kx];
            for (int z = z0; z < z1; ++z) {
              for (int y = y0; y < y1; ++y) {
                double* o = op + (static_cast<std::size_t>(z) * d.y + y) * d.x;
                const double* src = ip + (static_cast<std::size_t>(z + dz) * d.y + (y + dy)) * d.x + dx;
                for (int x = x0; x < x1; ++x) o[x] += wv * src[x];
              }
            }
          }
        }
      }
    }
  }
}

// Accumulates dW and db from `grad` (nonzero only inside `region`) and, when
// `grad_in` is given, adds the input gradient (nonzero only inside `region`
// dilated by k/2).
void conv_backward(const FeatureMap& in, const std::vector<double>& w, int cout, int k,
                   const std::vector<double>& grad, const Region& region,
                   std::vector<double>& dw, std::vector<double>& db, std::vector<double>* grad_in) {
  if (region.empty()) return;
  const Dims& d = in.dims;
  const std::size_t n = d.count();
  const int r = k / 2;
  const int k3 = k * k * k;

  for (int co = 0; co < cout; ++co) {
    const double* gp = grad.data() + static_cast<std::size_t>(co) * n;
    double acc = 0.0;
    for (int z = region.lo[2]; z <= region.hi[2]; ++z)
      for (int y = region.lo[1]; y <= region.hi[1]; ++y) {
        const double* g = gp + (static_cast<std::size_t>(z) * d.y + y) * d.x;
        for (int x = region.lo[0]; x <= region.hi[0]; ++x) acc += g[x];
      }
    db[static_cast<std::size_t>(co)] += acc;
  }

  for (int co = 0; co < cout; ++co) {
    const double* gp = grad.data() + static_cast<std::size_t>(co) * n;
    for (int ci = 0; ci < in.channels; ++ci) {
      const double* ip = in.data.data() + static_cast<std::size_t>(ci) * n;
      const std::size_t wbase = (static_cast<std::size_t>(co) * in.channels + ci) * k3;
      double* gi = grad_in ? grad_in->data() + static_cast<std::size_t>(ci) * n : nullptr;
      for (int kz = 0; kz < k; ++kz) {
        const int dz = kz - r;
        const int z0 = std::max(region.lo[2], -dz), z1 = std::min(region.hi[2], d.z - 1 - dz);
        for (int ky = 0; ky < k; ++ky) {
          const int dy = ky - r;
          const int y0 = std::max(region.lo[1], -dy), y1 = std::min(region.hi[1], d.y - 1 - dy);
          for (int kx = 0; kx < k; ++kx) {
            const int dx = kx - r;
            const int x0 = std::max(region.lo[0], -dx), x1 = std::min(region.hi[0], d.x - 1 - dx);
            const std::size_t widx = wbase + static_cast<std::size_t>((kz * k + ky) * k + kx);
            const double wv = w[widx];
            double acc = 0.0;
            for (int z = z0; z <= z1; ++z) {
              for (int y = y0; y <= y1; ++y) {
                const std::size_t row = (static_cast<std::size_t>(z) * d.y + y) * d.x;
                const std::size_t shifted =
                    (static_cast<std::size_t>(z + dz) * d.y + (y + dy)) * d.x + dx;
                const double* g = gp + row;
                const double* src = ip + shifted;
                for (int x = x0; x <= x1; ++x) acc += g[x] * src[x];
                if (gi) {
                  double* dst = gi + shifted;
                  for (int x = x0; x <= x1; ++x) dst[x] += wv * g[x];
                }
              }
            }
            dw[widx] += acc;
          }
        }
      }
    }
  }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void silu_forward(const FeatureMap& pre, FeatureMap& act) {
  act = FeatureMap{pre.channels, pre.dims, std::vector<double>(pre.data.size())};
  for (std::size_t i = 0; i < pre.data.size(); ++i) act.data[i] = pre.data[i] * sigmoid(pre.data[i]);
}

// grad <- grad * silu'(pre) inside region (grad is zero elsewhere).
void silu_backward(const FeatureMap& pre, const Region& region, std::vector<double>& grad) {
  if (region.empty()) return;
  const Dims& d = pre.dims;
  const std::size_t n = d.count();
  for (int c = 0; c < pre.channels; ++c) {
    for (int z = region.lo[2]; z <= region.hi[2]; ++z)
      for (int y = region.lo[1]; y <= region.hi[1]; ++y)
        for (int x = region.lo[0]; x <= region.hi[0]; ++x) {
          const std::size_t i = static_cast<std::size_t>(c) * n + (static_cast<std::size_t>(z) * d.y + y) * d.x + x;
          const double s = sigmoid(pre.data[i]);
          grad[i] *= s * (1.0 + pre.data[i] * (1.0 - s));
        }
  }
}

// 2x2x2 max-pool. The first maximal element in memory order wins ties.
void pool_forward(const FeatureMap& in, FeatureMap& out, std::vector<std::uint32_t>& argmax) {
  const Dims& d = in.dims;
  const Dims h = half(d);
  out = make_map(in.channels, h);
  argmax.assign(out.data.size(), 0);
  const std::size_t n = d.count();
  std::size_t o = 0;
  for (int c = 0; c < in.channels; ++c) {
    const double* ip = in.data.data() + static_cast<std::size_t>(c) * n;
    for (int z = 0; z < h.z; ++z)
      for (int y = 0; y < h.y; ++y)
        for (int x = 0; x < h.x; ++x, ++o) {
          std::size_t best = (static_cast<std::size_t>(2 * z) * d.y + 2 * y) * d.x + 2 * x;
          for (int bz = 0; bz < 2; ++bz)
            for (int by = 0; by < 2; ++by)
              for (int bx = 0; bx < 2; ++bx) {
                const std::size_t i =
                    (static_cast<std::size_t>(2 * z + bz) * d.y + (2 * y + by)) * d.x + 2 * x + bx;
                if (ip[i] > ip[best]) best = i;
              }
          out.data[o] = ip[best];
          argmax[o] = static_cast<std::uint32_t>(best);
        }
  }
}

void pool_backward(const FeatureMap& pooled, const std::vector<std::uint32_t>& argmax,
                   const std::vector<double>& grad_pooled, const Region& region,
                   const Dims& fine, std::vector<double>& grad_fine) {
  if (region.empty()) return;
  const Dims& h = pooled.dims;
  const std::size_t nh = h.count(), n = fine.count();
  for (int c = 0; c < pooled.channels; ++c) {
    for (int z = region.lo[2]; z <= region.hi[2]; ++z)
      for (int y = region.lo[1]; y <= region.hi[1]; ++y)
        for (int x = region.lo[0]; x <= region.hi[0]; ++x) {
          const std::size_t o = static_cast<std::size_t>(c) * nh + (static_cast<std::size_t>(z) * h.y + y) * h.x + x;
          grad_fine[static_cast<std::size_t>(c) * n + argmax[o]] += grad_pooled[o];
        }
  }
}

// Nearest-neighbour x2 upsampling of `in` into channels [0, in.channels) of
// `out`, which must already have the doubled dims.
void upsample_into(const FeatureMap& in, FeatureMap& out) {
  const Dims& h = in.dims;
  const Dims& d = out.dims;
  const std::size_t nh = h.count(), n = d.count();
  for (int c = 0; c < in.channels; ++c) {
    const double* ip = in.data.data() + static_cast<std::size_t>(c) * nh;
    double* op = out.data.data() + static_cast<std::size_t>(c) * n;
    for (int z = 0; z < d.z; ++z)
      for (int y = 0; y < d.y; ++y) {
        const double* src = ip + (static_cast<std::size_t>(z / 2) * h.y + y / 2) * h.x;
        double* dst = op + (static_cast<std::size_t>(z) * d.y + y) * d.x;
        for (int x = 0; x < d.x; ++x) dst[x] = src[x / 2];
      }
  }
}

// Sums child gradients of channels [0, channels) of `grad_fine` onto the
// coarse grid, for coarse voxels inside `region`.
void upsample_backward(const std::vector<double>& grad_fine, const Dims& fine, int channels,
                       const Region& region, std::vector<double>& grad_coarse) {
  if (region.empty()) return;
  const Dims h = half(fine);
  const std::size_t nh = h.count(), n = fine.count();
  for (int c = 0; c < channels; ++c) {
    const double* gp = grad_fine.data() + static_cast<std::size_t>(c) * n;
    double* cp = grad_coarse.data() + static_cast<std::size_t>(c) * nh;
    for (int z = region.lo[2]; z <= region.hi[2]; ++z)
      for (int y = region.lo[1]; y <= region.hi[1]; ++y)
        for (int x = region.lo[0]; x <= region.hi[0]; ++x) {
          double acc = 0.0;
          for (int bz = 0; bz < 2; ++bz)
            for (int by = 0; by < 2; ++by)
              for (int bx = 0; bx < 2; ++bx)
                acc += gp[(static_cast<std::size_t>(2 * z + bz) * fine.y + (2 * y + by)) * fine.x + 2 * x + bx];
          cp[(static_cast<std::size_t>(z) * h.y + y) * h.x + x] += acc;
        }
  }
}

struct Indexer {
  int depth;
  std::size_t enc(int l) const { return static_cast<std::size_t>(l); }
  std::size_t bottleneck() const { return static_cast<std::size_t>(depth); }
  std::size_t dec(int l) const { return static_cast<std::size_t>(depth + 1 + (depth - 1 - l)); }
  std::size_t head() const { return static_cast<std::size_t>(2 * depth + 1); }
};

void check_params(const NetParams& params) {
  const auto layout = conv_layout(params.config);
  if (params.tensors.size() != 2 * layout.size()) {
    throw ShapeError("parameter tensor count does not match the net configuration");
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (params.tensors[2 * i].values.size() != layout[i].weight_count() ||
        params.tensors[2 * i + 1].values.size() != static_cast<std::size_t>(layout[i].out_channels)) {
      throw ShapeError("parameter tensor '" + layout[i].name + "' has the wrong size");
    }
  }
}

void check_input(const NetConfig& cfg, const Volume& input) {
  const int m = 1 << cfg.depth;
  const Dims& d = input.dims();
  if (d.x % m != 0 || d.y % m != 0 || d.z % m != 0) {
    throw ConfigError("input dims " + to_string(d) + " not divisible by 2^depth = " +
                      std::to_string(m));
  }
}

}  // namespace

std::pair<Volume, ForwardCache> forward(const NetParams& params, const Volume& input) {
  check_params(params);
  const NetConfig& cfg = params.config;
  check_input(cfg, input);
  const auto layout = conv_layout(cfg);
  const Indexer ix{cfg.depth};
  auto weight = [&](std::size_t conv) -> const std::vector<double>& { return params.tensors[2 * conv].values; };
  auto bias = [&](std::size_t conv) -> const std::vector<double>& { return params.tensors[2 * conv + 1].values; };

  ForwardCache c;
  c.params_fingerprint = params.fingerprint();
  c.config = cfg;
  c.input_dims = input.dims();
  c.spacing = input.spacing();
  c.input = FeatureMap{1, input.dims(), std::vector<double>(input.values().begin(), input.values().end())};
  const auto depth = static_cast<std::size_t>(cfg.depth);
  c.enc_pre.resize(depth);
  c.enc_act.resize(depth);
  c.pool_argmax.resize(depth);
  c.pooled.resize(depth);
  c.dec_in.resize(depth);
  c.dec_pre.resize(depth);
  c.dec_act.resize(depth);

  const FeatureMap* x = &c.input;
  for (int l = 0; l < cfg.depth; ++l) {
    const auto L = static_cast<std::size_t>(l);
    const auto& s = layout[ix.enc(l)];
    conv_forward(*x, weight(ix.enc(l)), bias(ix.enc(l)), s.out_channels, s.kernel, c.enc_pre[L]);
    silu_forward(c.enc_pre[L], c.enc_act[L]);
    pool_forward(c.enc_act[L], c.pooled[L], c.pool_argmax[L]);
    x = &c.pooled[L];
  }
  {
    const auto& s = layout[ix.bottleneck()];
    conv_forward(*x, weight(ix.bottleneck()), bias(ix.bottleneck()), s.out_channels, s.kernel,
                 c.bottleneck_pre);
    silu_forward(c.bottleneck_pre, c.bottleneck_act);
  }
  const FeatureMap* below = &c.bottleneck_act;
  for (int l = cfg.depth - 1; l >= 0; --l) {
    const auto L = static_cast<std::size_t>(l);
    const FeatureMap& skip = c.enc_act[L];
    FeatureMap& cat = c.dec_in[L];
    cat = make_map(below->channels + skip.channels, skip.dims);
    upsample_into(*below, cat);
    std::copy(skip.data.begin(), skip.data.end(),
              cat.data.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(below->channels) * skip.dims.count()));
    const auto& s = layout[ix.dec(l)];
    conv_forward(cat, weight(ix.dec(l)), bias(ix.dec(l)), s.out_channels, s.kernel, c.dec_pre[L]);
    silu_forward(c.dec_pre[L], c.dec_act[L]);
    below = &c.dec_act[L];
  }
  conv_forward(*below, weight(ix.head()), bias(ix.head()), 1, 1, c.logits);
  c.output.resize(c.logits.data.size());
  for (std::size_t i = 0; i < c.output.size(); ++i) c.output[i] = sigmoid(c.logits.data[i]);

  Volume out(input.dims(), input.spacing(), ValueDomain::Unit, c.output);
  return {std::move(out), std::move(c)};
}

Volume predict(const NetParams& params, const Volume& input) {
  return forward(params, input).first;
}

ParamGrads backward(const NetParams& params, const ForwardCache& c, const Volume& grad_out) {
  check_params(params);
  if (c.params_fingerprint != params.fingerprint() || !(c.config == params.config)) {
    throw StaleCacheError("backward: cache was produced by different parameters");
  }
  if (grad_out.dims() != c.input_dims) {
    throw ShapeError("backward: grad_out dims " + to_string(grad_out.dims()) +
                     " differ from output dims " + to_string(c.input_dims));
  }
  const NetConfig& cfg = params.config;
  const auto layout = conv_layout(cfg);
  const Indexer ix{cfg.depth};
  ParamGrads grads = zero_grads(params);
  auto weight = [&](std::size_t conv) -> const std::vector<double>& { return params.tensors[2 * conv].values; };

  const Dims& top = c.input_dims;
  std::vector<double> g(grad_out.values().begin(), grad_out.values().end());
  const Region out_region = nonzero_bounds(g, top);
  if (out_region.empty()) return grads;

  // Logistic output.
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] != 0.0) g[i] *= c.output[i] * (1.0 - c.output[i]);
  }

  // Head (1x1x1).
  const FeatureMap& head_in = c.dec_act[0];
  std::vector<double> grad_act(head_in.data.size(), 0.0);
  conv_backward(head_in, weight(ix.head()), 1, 1, g, out_region, grads[2 * ix.head()],
                grads[2 * ix.head() + 1], &grad_act);
  Region act_region = out_region;

  // Decoder, top level first. Skip gradients are parked per level until the
  // encoder pass picks them up.
  std::vector<std::vector<double>> skip_grad(static_cast<std::size_t>(cfg.depth));
  std::vector<Region> skip_region(static_cast<std::size_t>(cfg.depth));
  for (int l = 0; l < cfg.depth; ++l) {
    const auto L = static_cast<std::size_t>(l);
    const auto& s = layout[ix.dec(l)];
    const FeatureMap& cat = c.dec_in[L];
    silu_backward(c.dec_pre[L], act_region, grad_act);
    std::vector<double> grad_cat(cat.data.size(), 0.0);
    conv_backward(cat, weight(ix.dec(l)), s.out_channels, s.kernel, grad_act, act_region,
                  grads[2 * ix.dec(l)], grads[2 * ix.dec(l) + 1], &grad_cat);
    const Region cat_region = dilate(act_region, 1, cat.dims);

    const int up_channels = cat.channels - c.enc_act[L].channels;
    const std::size_t n = cat.dims.count();
    skip_grad[L].assign(grad_cat.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(up_channels) * n),
                        grad_cat.end());
    skip_region[L] = cat_region;

    const FeatureMap& below = l + 1 < cfg.depth ? c.dec_act[L + 1] : c.bottleneck_act;
    grad_act.assign(below.data.size(), 0.0);
    act_region = coarsen(cat_region);
    upsample_backward(grad_cat, cat.dims, up_channels, act_region, grad_act);
  }

  // Bottleneck.
  {
    const auto& s = layout[ix.bottleneck()];
    const auto last = static_cast<std::size_t>(cfg.depth - 1);
    silu_backward(c.bottleneck_pre, act_region, grad_act);
    std::vector<double> grad_pool(c.pooled[last].data.size(), 0.0);
    conv_backward(c.pooled[last], weight(ix.bottleneck()), s.out_channels, s.kernel, grad_act,
                  act_region, grads[2 * ix.bottleneck()], grads[2 * ix.bottleneck() + 1], &grad_pool);
    grad_act = std::move(grad_pool);
    act_region = dilate(act_region, 1, c.pooled[last].dims);
  }

  // Encoder, deepest level first. grad_act holds the pooled-output gradient.
  for (int l = cfg.depth - 1; l >= 0; --l) {
    const auto L = static_cast<std::size_t>(l);
    const auto& s = layout[ix.enc(l)];
    const FeatureMap& act = c.enc_act[L];
    std::vector<double> grad_enc = std::move(skip_grad[L]);
    pool_backward(c.pooled[L], c.pool_argmax[L], grad_act, act_region, act.dims, grad_enc);
    const Region region = unite(refine(act_region), skip_region[L]);
    silu_backward(c.enc_pre[L], region, grad_enc);

    const FeatureMap& in = l == 0 ? c.input : c.pooled[L - 1];
    std::vector<double> grad_in;
    if (l > 0) grad_in.assign(in.data.size(), 0.0);
    conv_backward(in, weight(ix.enc(l)), s.out_channels, s.kernel, grad_enc, region,
                  grads[2 * ix.enc(l)], grads[2 * ix.enc(l) + 1], l > 0 ? &grad_in : nullptr);
    grad_act = std::move(grad_in);
    act_region = dilate(region, 1, in.dims);
  }
  return grads;
}

}  // namespace ribcage

#include "ribcage/losses.hpp"

#include <algorithm>
#include <cmath>

#include "ribcage/rng.hpp"

namespace ribcage {

const char* to_string(LossKind k) noexcept {
  switch (k) {
    case LossKind::Dice:
      return "dice";
    case LossKind::Mse:
      return "mse";
    case LossKind::Err:
      return "err";
    case LossKind::Gf:
      return "gf";
    case LossKind::MseErr:
      return "mse+err";
    case LossKind::Rib:
      return "mse+err+gf";
  }
  return "mse+err+gf";
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "dice") return LossKind::Dice;
  if (s == "mse") return LossKind::Mse;
  if (s == "err") return LossKind::Err;
  if (s == "gf") return LossKind::Gf;
  if (s == "mse+err") return LossKind::MseErr;
  if (s == "mse+err+gf" || s == "rib") return LossKind::Rib;
  throw ConfigError("unknown loss kind '" + s + "'");
}

const char* to_string(LossRegion r) noexcept {
  return r == LossRegion::DefectCrop ? "crop" : "full";
}

LossRegion parse_loss_region(const std::string& s) {
  if (s == "crop") return LossRegion::DefectCrop;
  if (s == "full") return LossRegion::FullVolume;
  throw ConfigError("unknown loss region '" + s + "' (expected crop or full)");
}

namespace kernel {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("loss operands differ in length");
  if (a.empty()) throw ShapeError("loss operands are empty");
}

}  // namespace

double dice(std::span<const double> p, std::span<const double> g) {
  check_lengths(p, g);
  double inter = 0.0, sp = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    inter += p[i] * g[i];
    sp += p[i];
    sg += g[i];
  }
  return 1.0 - (2.0 * inter + kDiceEpsilon) / (sp + sg + kDiceEpsilon);
}

double mse(std::span<const double> p, std::span<const double> g) {
  check_lengths(p, g);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - g[i];
    acc += d * d;
  }
  return acc / static_cast<double>(p.size());
}

double err(std::span<const double> p, std::span<const double> g) {
  check_lengths(p, g);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double e = (1.0 - g[i]) * p[i];
    acc += e * e;
  }
  return acc / static_cast<double>(p.size());
}

double gf(std::span<const double> p, std::span<const double> g) {
  check_lengths(p, g);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double e = (1.0 - p[i]) * g[i];
    acc += e * e;
  }
  return acc / static_cast<double>(p.size());
}

double value(LossKind kind, std::span<const double> p, std::span<const double> g) {
  switch (kind) {
    case LossKind::Dice:
      return dice(p, g);
    case LossKind::Mse:
      return mse(p, g);
    case LossKind::Err:
      return err(p, g);
    case LossKind::Gf:
      return gf(p, g);
    case LossKind::MseErr:
      return mse(p, g) + err(p, g);
    case LossKind::Rib:
      return mse(p, g) + err(p, g) + gf(p, g);
  }
  throw ConfigError("unknown loss kind");
}

std::vector<double> gradient(LossKind kind, std::span<const double> p,
                             std::span<const double> g) {
  check_lengths(p, g);
  const std::size_t n = p.size();
  const double scale = 2.0 / static_cast<double>(n);
  std::vector<double> out(n, 0.0);

  const bool with_mse = kind == LossKind::Mse || kind == LossKind::MseErr || kind == LossKind::Rib;
  const bool with_err = kind == LossKind::Err || kind == LossKind::MseErr || kind == LossKind::Rib;
  const bool with_gf = kind == LossKind::Gf || kind == LossKind::Rib;

  if (kind == LossKind::Dice) {
    double inter = 0.0, sp = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inter += p[i] * g[i];
      sp += p[i];
      sg += g[i];
    }
    const double num = 2.0 * inter + kDiceEpsilon;
    const double den = sp + sg + kDiceEpsilon;
    const double den_sq = den * den;
    for (std::size_t i = 0; i < n; ++i) out[i] = -(2.0 * g[i] * den - num) / den_sq;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    if (with_mse) d += scale * (p[i] - g[i]);
    if (with_err) {
      const double c = 1.0 - g[i];
      d += scale * c * c * p[i];
    }
    if (with_gf) d -= scale * g[i] * g[i] * (1.0 - p[i]);
    out[i] = d;
  }
  return out;
}

}  // namespace kernel

namespace {

void check_operands(const Volume& pred, const Volume& target, const char* op) {
  if (pred.dims() != target.dims()) {
    throw ShapeError(std::string(op) + ": dimension mismatch " + to_string(pred.dims()) +
                     " vs " + to_string(target.dims()));
  }
  if (pred.domain() != ValueDomain::Unit || target.domain() != ValueDomain::Unit) {
    throw DomainError(std::string(op) + ": inputs must be unit-domain volumes");
  }
}

}  // namespace

double dice_loss(const Volume& pred, const Volume& target) {
  check_operands(pred, target, "dice_loss");
  return kernel::dice(pred.values(), target.values());
}

double mse_loss(const Volume& pred, const Volume& target) {
  check_operands(pred, target, "mse_loss");
  return kernel::mse(pred.values(), target.values());
}

std::pair<double, Volume> err_loss(const Volume& pred, const Volume& target) {
  check_operands(pred, target, "err_loss");
  Volume extraneous = elementwise_mul(complement(target), pred);
  double acc = 0.0;
  for (double e : extraneous.values()) acc += e * e;
  return {acc / static_cast<double>(extraneous.size()), std::move(extraneous)};
}

std::pair<double, Volume> gf_loss(const Volume& pred, const Volume& target) {
  check_operands(pred, target, "gf_loss");
  Volume gaps = elementwise_mul(complement(pred), target);
  double acc = 0.0;
  for (double e : gaps.values()) acc += e * e;
  return {acc / static_cast<double>(gaps.size()), std::move(gaps)};
}

LossReport rib_loss(const Volume& pred, const Volume& target, LossRegion region) {
  check_operands(pred, target, "rib_loss");
  LossReport r;
  r.dice = kernel::dice(pred.values(), target.values());
  r.mse = kernel::mse(pred.values(), target.values());
  r.err = kernel::err(pred.values(), target.values());
  r.gf = kernel::gf(pred.values(), target.values());
  r.rib = r.mse + r.err + r.gf;
  r.n = pred.size();
  r.region = region;
  return r;
}

LossReport region_loss(const Volume& pred, const Volume& target, const Box& defect,
                       LossRegion region) {
  if (region == LossRegion::FullVolume) return rib_loss(pred, target, region);
  return rib_loss(crop(pred, defect), crop(target, defect), region);
}

double loss_value(LossKind kind, const Volume& pred, const Volume& target) {
  check_operands(pred, target, "loss_value");
  return kernel::value(kind, pred.values(), target.values());
}

Volume loss_gradient(LossKind kind, const Volume& pred, const Volume& target) {
  check_operands(pred, target, "loss_gradient");
  return Volume(pred.dims(), pred.spacing(), ValueDomain::Unbounded,
                kernel::gradient(kind, pred.values(), target.values()));
}

double finite_diff_check(LossKind kind, const Volume& pred, const Volume& target, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError("finite-difference step must be finite and > 0");
  }
  check_operands(pred, target, "finite_diff_check");
  const auto g = target.values();
  const auto analytic = kernel::gradient(kind, pred.values(), g);
  std::vector<double> p(pred.values().begin(), pred.values().end());
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double up = kernel::value(kind, p, g);
    p[i] = saved - h;
    const double down = kernel::value(kind, p, g);
    p[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

double gradcheck_random_pairs(LossKind kind, int n, int samples, double h, std::uint64_t seed) {
  if (n < 1 || samples < 1) throw ConfigError("gradcheck needs n >= 1 and samples >= 1");
  const Dims dims{n, n, n};
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Rng rng(seed + static_cast<std::uint64_t>(s));
    std::vector<double> p(dims.count());
    std::vector<double> g(dims.count());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = rng.uniform(0.05, 0.95);
      g[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    }
    const Volume pred(dims, {}, ValueDomain::Unit, std::move(p));
    const Volume target(dims, {}, ValueDomain::Unit, std::move(g));
    worst = std::max(worst, finite_diff_check(kind, pred, target, h));
  }
  return worst;
}

}  // namespace ribcage

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ribcage/volume.hpp"

namespace ribcage {

/// Objectives the trainer can minimise. Err and Gf exist on their own for
/// testing; the trainable configurations are Dice, Mse, MseErr and Rib.
enum class LossKind { Dice, Mse, Err, Gf, MseErr, Rib };

const char* to_string(LossKind k) noexcept;
/// Accepts "dice", "mse", "err", "gf", "mse+err", "mse+err+gf" (or "rib").
LossKind parse_loss_kind(const std::string& s);

enum class LossRegion { DefectCrop, FullVolume };

const char* to_string(LossRegion r) noexcept;
LossRegion parse_loss_region(const std::string& s);

/// Smoothing term of the soft Dice quotient.
inline constexpr double kDiceEpsilon = 1e-6;

struct LossReport {
  double dice = 0.0;
  double mse = 0.0;
  double err = 0.0;
  double gf = 0.0;
  /// mse + err + gf. Dice is reported but is not part of the sum.
  double rib = 0.0;
  /// Voxels the means are taken over.
  std::size_t n = 0;
  LossRegion region = LossRegion::FullVolume;
};

// Raw kernels. They accept any finite values so the finite-difference
// checker can step outside [0, 1]; the Volume overloads enforce Unit inputs.
namespace kernel {
double dice(std::span<const double> pred, std::span<const double> target);
double mse(std::span<const double> pred, std::span<const double> target);
double err(std::span<const double> pred, std::span<const double> target);
double gf(std::span<const double> pred, std::span<const double> target);
double value(LossKind kind, std::span<const double> pred, std::span<const double> target);
std::vector<double> gradient(LossKind kind, std::span<const double> pred,
                             std::span<const double> target);
}  // namespace kernel

/// 1 - (2 sum(p*g) + eps) / (sum(p) + sum(g) + eps).
double dice_loss(const Volume& pred, const Volume& target);
/// mean((p - g)^2).
double mse_loss(const Volume& pred, const Volume& target);
/// E_R = (1 - g) * p and mean(E_R^2).
std::pair<double, Volume> err_loss(const Volume& pred, const Volume& target);
/// G_F = (1 - p) * g and mean(G_F^2).
std::pair<double, Volume> gf_loss(const Volume& pred, const Volume& target);

LossReport rib_loss(const Volume& pred, const Volume& target,
                    LossRegion region = LossRegion::FullVolume);

/// Crops both volumes to `defect` when region is DefectCrop, then rib_loss.
LossReport region_loss(const Volume& pred, const Volume& target, const Box& defect,
                       LossRegion region);

double loss_value(LossKind kind, const Volume& pred, const Volume& target);

/// Analytic d(loss)/d(pred), voxelwise.
Volume loss_gradient(LossKind kind, const Volume& pred, const Volume& target);

/// Central differences with step h on every voxel of `pred`, compared with
/// loss_gradient. Returns the largest |analytic - numeric| /
/// max(|analytic|, |numeric|, 1e-8).
double finite_diff_check(LossKind kind, const Volume& pred, const Volume& target, double h);

/// Worst finite_diff_check over `samples` random pairs on an n^3 grid:
/// prediction uniform in [0.05, 0.95], target a fair coin per voxel. Pair i
/// is drawn from seed + i.
double gradcheck_random_pairs(LossKind kind, int n, int samples, double h, std::uint64_t seed);

}  // namespace ribcage

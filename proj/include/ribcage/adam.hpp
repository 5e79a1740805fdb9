#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ribcage/micronet.hpp"

namespace ribcage {

/// Adam hyperparameters. Defaults are the desk-scale ones; the reference
/// configuration uses lr = 1e-5 and batch size 2.
struct OptConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Coupled (L2) decay: wd * param is added to the gradient before the
  /// moment updates.
  double weight_decay = 1e-4;
  int batch_size = 1;

  friend bool operator==(const OptConfig&, const OptConfig&) = default;
};

void validate(const OptConfig& cfg);

struct OptState {
  OptConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  friend bool operator==(const OptState&, const OptState&) = default;
};

OptState make_opt_state(const NetParams& params, const OptConfig& cfg);

/// One Adam update of a flat parameter block. `step` is the 1-based step
/// number used for bias correction.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const OptConfig& cfg);

/// Updates every tensor and increments opt.step.
void adam_step(NetParams& params, const ParamGrads& grads, OptState& opt);

}  // namespace ribcage

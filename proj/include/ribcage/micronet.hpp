#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ribcage/volume.hpp"

namespace ribcage {

/// Compact 3D U-Net. Each encoder level is a 3x3x3 convolution + SiLU
/// followed by 2x2x2 max-pooling; the bottleneck is one more convolution.
/// Each decoder level upsamples x2 (nearest neighbour), concatenates the
/// matching encoder activation and applies a 3x3x3 convolution + SiLU. A
/// 1x1x1 convolution and the logistic function produce the output.
/// Level l carries base_channels * 2^l channels; the bottleneck sits at
/// level `depth`.
struct NetConfig {
  int depth = 2;
  int base_channels = 8;

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

void validate(const NetConfig& cfg);

struct ConvShape {
  std::string name;
  int in_channels;
  int out_channels;
  int kernel;  // 3 or 1

  std::size_t weight_count() const noexcept {
    return static_cast<std::size_t>(in_channels) * out_channels * kernel * kernel * kernel;
  }
};

/// Convolutions in declaration order: enc0..enc{depth-1}, bottleneck,
/// dec{depth-1}..dec0, head.
std::vector<ConvShape> conv_layout(const NetConfig& cfg);

struct ParamTensor {
  std::string name;
  std::vector<double> values;

  friend bool operator==(const ParamTensor&, const ParamTensor&) = default;
};

/// Weights and biases, two tensors per convolution in conv_layout order
/// (weight layout [out][in][kz][ky][kx]).
struct NetParams {
  NetConfig config;
  std::vector<ParamTensor> tensors;

  std::size_t parameter_count() const noexcept;
  /// FNV-1a over the raw parameter bytes.
  std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const NetParams&, const NetParams&) = default;
};

/// Gradient per parameter tensor, same order and sizes as NetParams::tensors.
using ParamGrads = std::vector<std::vector<double>>;

/// Default output prior for init_params: roughly the implant share of a
/// desk-scale defect crop.
inline constexpr double kDefaultHeadPrior = 0.05;

/// Weights uniform in +-sqrt(6 / fan_in). Biases are zero except the head's,
/// which is logit(head_prior) so the initial output matches a sparse target
/// instead of 0.5.
NetParams init_params(const NetConfig& cfg, std::uint64_t seed,
                      double head_prior = kDefaultHeadPrior);
NetParams zero_params(const NetConfig& cfg);
ParamGrads zero_grads(const NetParams& params);

/// Channel-major activation block.
struct FeatureMap {
  int channels = 0;
  Dims dims;
  std::vector<double> data;
};

/// Intermediates recorded by forward() for backward().
struct ForwardCache {
  std::uint64_t params_fingerprint = 0;
  NetConfig config;
  Dims input_dims;
  Spacing spacing;
  FeatureMap input;
  std::vector<FeatureMap> enc_pre, enc_act;  // per encoder level
  std::vector<std::vector<std::uint32_t>> pool_argmax;
  std::vector<FeatureMap> pooled;
  FeatureMap bottleneck_pre, bottleneck_act;
  std::vector<FeatureMap> dec_in, dec_pre, dec_act;  // index = level
  FeatureMap logits;
  std::vector<double> output;
};

/// Predicted implant for the defective volume `input` (Unit domain, dims
/// divisible by 2^depth). Output has the input's dims and spacing.
std::pair<Volume, ForwardCache> forward(const NetParams& params, const Volume& input);

/// forward() without keeping the cache.
Volume predict(const NetParams& params, const Volume& input);

/// Reverse-mode gradients of sum(grad_out * output). Work is restricted to
/// the bounding box of nonzero grad_out entries, so a loss confined to the
/// defect crop costs little beyond that region.
ParamGrads backward(const NetParams& params, const ForwardCache& cache, const Volume& grad_out);

}  // namespace ribcage

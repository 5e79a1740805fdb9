#include "ribcage/adam.hpp"

#include <cmath>

namespace ribcage {

void validate(const OptConfig& cfg) {
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("learning rate must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(cfg.eps > 0.0)) throw ConfigError("eps must be > 0");
  if (!(cfg.weight_decay >= 0.0) || !std::isfinite(cfg.weight_decay)) {
    throw ConfigError("weight decay must be >= 0");
  }
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
}

OptState make_opt_state(const NetParams& params, const OptConfig& cfg) {
  validate(cfg);
  OptState s;
  s.config = cfg;
  for (const auto& t : params.tensors) {
    s.m.emplace_back(t.values.size(), 0.0);
    s.v.emplace_back(t.values.size(), 0.0);
  }
  return s;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const OptConfig& cfg) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw ShapeError("adam_update: parameter, gradient and moment sizes differ");
  }
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + cfg.weight_decay * params[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void adam_step(NetParams& params, const ParamGrads& grads, OptState& opt) {
  if (grads.size() != params.tensors.size() || opt.m.size() != params.tensors.size() ||
      opt.v.size() != params.tensors.size()) {
    throw ShapeError("adam_step: tensor counts of params, grads and optimizer state differ");
  }
  const std::uint64_t step = opt.step + 1;
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    adam_update(params.tensors[i].values, grads[i], opt.m[i], opt.v[i], step, opt.config);
  }
  opt.step = step;
}

}  // namespace ribcage

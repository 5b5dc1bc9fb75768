#include "e3p/adam.hpp"

#include <cmath>

#include "e3p/common.hpp"

namespace e3p {

AdamState AdamState::init(const ParamStore& params) {
  AdamState s;
  s.m.reserve(params.items().size());
  s.v.reserve(params.items().size());
  for (const auto& [name, t] : params.items()) {
    s.m.emplace_back(t->values.size(), 0.0);
    s.v.emplace_back(t->values.size(), 0.0);
  }
  return s;
}

void adam_step(ParamStore& params, AdamState& state, const AdamConfig& cfg) {
  const auto& items = params.items();
  if (state.m.size() != items.size() || state.v.size() != items.size())
    throw ShapeError("adam_step: moment buffers do not match the parameter store");
  ++state.step_count;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_count));
  for (std::size_t k = 0; k < items.size(); ++k) {
    Tensor& t = *items[k].second;
    if (state.m[k].size() != t.values.size())
      throw ShapeError("adam_step: moment shape mismatch for " + items[k].first);
    t.ensure_grad();
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      double g = t.grad[i];
      if (!cfg.decoupled) g += cfg.weight_decay * t.values[i];
      state.m[k][i] = cfg.beta1 * state.m[k][i] + (1.0 - cfg.beta1) * g;
      state.v[k][i] = cfg.beta2 * state.v[k][i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = state.m[k][i] / bc1;
      const double v_hat = state.v[k][i] / bc2;
      t.values[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
      if (cfg.decoupled) t.values[i] -= cfg.lr * cfg.weight_decay * t.values[i];
    }
  }
}

}  // namespace e3p

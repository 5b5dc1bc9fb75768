#pragma once

#include <vector>

#include "e3p/nn.hpp"

namespace e3p {

struct AdamConfig {
  double lr = 7e-4;
  double weight_decay = 0.4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Coupled (classic L2) decay adds wd * theta to the gradient before the
  // moment update; decoupled subtracts lr * wd * theta after it.
  bool decoupled = false;
};

struct AdamState {
  std::vector<std::vector<double>> m, v;
  long long step_count = 0;

  static AdamState init(const ParamStore& params);
};

// One Adam update over every parameter, reading gradients in store order.
void adam_step(ParamStore& params, AdamState& state, const AdamConfig& cfg);

}  // namespace e3p

#pragma once

#include <cstdint>
#include <string>

#include "e3p/epg.hpp"
#include "e3p/model.hpp"

namespace e3p {

// Training configuration. Optimizer defaults are the recommended recipe:
// Adam, lr 7e-4, weight decay 0.4, 200 epochs, batch size 32.
struct TrainConfig {
  double lr = 7e-4;
  double weight_decay = 0.4;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 1;
  int horizon = 3;
  double drop_rate = 0.2;

  bool epg_enabled = true;
  AggregatorVariant epg_variant = AggregatorVariant::transf;
  bool arm_enabled = true;
  int arm_layers = 2;
  std::string arm_mask_share = "per_batch";  // fixed; one mask per training batch

  TextMode text_mode = TextMode::pseudo_clip;
  int backbone_layers = 2;
  int heads = 4;
  int ffn_dim = 256;

  bool decoupled_weight_decay = false;
  double val_fraction = 0.1;
  double split_ratio = 0.7;
  double transition_lambda = 1.0;
  int trials = 1;

  void validate() const;
  ModelConfig model_config(int num_actions, int num_events) const;

  std::string to_json_string() const;
  static TrainConfig from_json_string(const std::string& text);
  static TrainConfig from_json_file(const std::string& path);
};

}  // namespace e3p

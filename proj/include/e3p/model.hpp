#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "e3p/arm.hpp"
#include "e3p/backbone.hpp"
#include "e3p/epg.hpp"
#include "e3p/mask.hpp"
#include "e3p/nn.hpp"
#include "e3p/objective.hpp"
#include "e3p/prompts.hpp"
#include "e3p/world.hpp"

namespace e3p {

enum class TextMode { pseudo_clip, learnable_tokens };

TextMode text_mode_from_string(const std::string& s);
std::string to_string(TextMode m);

struct ModelConfig {
  int horizon = 3;
  int num_actions = 0;
  int num_events = 0;
  bool epg_enabled = true;
  AggregatorVariant epg_variant = AggregatorVariant::transf;
  bool arm_enabled = true;
  int arm_layers = 2;
  int backbone_layers = 2;
  int heads = 4;
  int ffn_dim = 256;
  TextMode text_mode = TextMode::pseudo_clip;
  int feature_dim = 512;
  int hidden = 128;

  void validate() const;
};

// The full planning model: feature MLPs, event-aware prompt generation,
// transformer feature extractor, relation mining, and the training losses.
class E3PModel {
 public:
  E3PModel(const ModelConfig& cfg, std::uint64_t init_seed);
  E3PModel(const ModelConfig& cfg);  // parameters left for a checkpoint load

  struct Forward {
    TensorPtr a_final;                    // (B*T) x hidden
    TensorPtr event_logits;               // B x E, null when EPG is disabled
    std::vector<TensorPtr> step_logits;   // per step: B x N dot products
    TensorPtr l_action;                   // batch-mean scalars (when with_loss)
    TensorPtr l_event;
    TensorPtr total;
    LossReport report;
  };

  // Batched forward over instances sharing the model's horizon. arm_mask is
  // required when ARM is enabled and must satisfy the relation-mask
  // invariants; pass nullptr otherwise.
  Forward forward_batch(Tape& tape, const std::vector<const PlanInstance*>& batch, const World& world,
                        const Mask* arm_mask, bool with_loss) const;

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Submodules, exposed for targeted tests.
  const Mlp2& visual_mlp() const { return visual_mlp_; }
  const Mlp2& text_mlp() const { return text_mlp_; }
  const EventPromptGenerator& epg() const { return epg_; }
  const Backbone& backbone() const { return backbone_; }
  const ArmStack& arm() const { return arm_; }

 private:
  void build(RandomStream& rng);
  void refresh_text_cache(const World& world) const;
  TensorPtr prompt_rows(Tape& tape, const World& world) const;
  TensorPtr bank_rows(Tape& tape, const World& world) const;

  ModelConfig cfg_;
  ParamStore params_;
  Mlp2 visual_mlp_;
  Mlp2 text_mlp_;
  EventPromptGenerator epg_;
  Backbone backbone_;
  ArmStack arm_;
  TensorPtr prompt_tokens_;  // learnable-token mode
  TensorPtr action_tokens_;

  mutable std::uint64_t cached_embed_seed_ = 0;
  mutable TensorPtr cached_prompt_raw_;
  mutable TensorPtr cached_bank_raw_;
};

}  // namespace e3p

#pragma once

#include <string>
#include <vector>

#include "e3p/nn.hpp"
#include "e3p/tensor.hpp"

namespace e3p {

enum class AggregatorVariant { concat, transf };

AggregatorVariant aggregator_variant_from_string(const std::string& s);
std::string to_string(AggregatorVariant v);

// Event-aware prompt generation: extract event information from the embedded
// start/goal states, classify it against the event label, and inject it into
// the per-step prompt representations.
struct EventPromptGenerator {
  Mlp2 extractor;      // 256 -> 64 -> 128
  Linear head;         // 128 -> E
  AggregatorVariant variant = AggregatorVariant::transf;
  Linear concat_proj;  // 256 -> 128 (concat variant)
  EncoderLayer agg;    // one encoder layer over T+1 tokens (transf variant)

  static EventPromptGenerator create(ParamStore& ps, AggregatorVariant variant, int num_events,
                                     int dim, int heads, int ffn_dim, RandomStream& rng);

  // pairs is B x 2*dim (embedded start and goal states side by side).
  TensorPtr extract_event(Tape& tape, const TensorPtr& pairs) const;

  TensorPtr event_logits(Tape& tape, const TensorPtr& e_hat) const;

  // Single-instance aggregation: prompts is T x dim, e_hat 1 x dim.
  TensorPtr aggregate(Tape& tape, const TensorPtr& prompts, const TensorPtr& e_hat, int horizon) const;

  // Batched aggregation over shared prompts: e_hat is B x dim; returns
  // (B*T) x dim stacked event-aware prompts.
  TensorPtr aggregate_batch(Tape& tape, const TensorPtr& prompts, const TensorPtr& e_hat,
                            int horizon) const;
};

// Cross-entropy of the event head against the label (single instance).
TensorPtr event_loss(Tape& tape, const EventPromptGenerator& epg, const TensorPtr& e_hat, int y_e,
                     int num_events);

}  // namespace e3p

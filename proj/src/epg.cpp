#include "e3p/epg.hpp"

#include <stdexcept>

#include "e3p/common.hpp"

namespace e3p {

AggregatorVariant aggregator_variant_from_string(const std::string& s) {
  if (s == "concat") return AggregatorVariant::concat;
  if (s == "transf") return AggregatorVariant::transf;
  throw std::invalid_argument("unknown aggregator variant: " + s);
}

std::string to_string(AggregatorVariant v) {
  return v == AggregatorVariant::concat ? "concat" : "transf";
}

EventPromptGenerator EventPromptGenerator::create(ParamStore& ps, AggregatorVariant variant,
                                                  int num_events, int dim, int heads, int ffn_dim,
                                                  RandomStream& rng) {
  EventPromptGenerator epg;
  epg.variant = variant;
  epg.extractor = Mlp2::create(ps, "epg.extractor", 2 * dim, 64, dim, rng);
  epg.head = Linear::create(ps, "epg.head", dim, num_events, rng);
  if (variant == AggregatorVariant::concat)
    epg.concat_proj = Linear::create(ps, "epg.concat_proj", 2 * dim, dim, rng);
  else
    epg.agg = EncoderLayer::create(ps, "epg.agg", dim, heads, ffn_dim, rng);
  return epg;
}

TensorPtr EventPromptGenerator::extract_event(Tape& tape, const TensorPtr& pairs) const {
  if (pairs->cols() != extractor.l1.w->shape[0])
    throw ShapeError("extract_event: expected concatenated start/goal embeddings");
  return extractor.forward(tape, pairs);
}

TensorPtr EventPromptGenerator::event_logits(Tape& tape, const TensorPtr& e_hat) const {
  return head.forward(tape, e_hat);
}

TensorPtr EventPromptGenerator::aggregate(Tape& tape, const TensorPtr& prompts, const TensorPtr& e_hat,
                                          int horizon) const {
  return aggregate_batch(tape, prompts, e_hat, horizon);
}

TensorPtr EventPromptGenerator::aggregate_batch(Tape& tape, const TensorPtr& prompts,
                                                const TensorPtr& e_hat, int horizon) const {
  const int t = horizon;
  if (prompts->rows() != t) throw ShapeError("aggregate: expected one prompt per step");
  const int batch = e_hat->rows();
  if (variant == AggregatorVariant::concat) {
    // Position-wise: each output depends only on (p_t, e_hat).
    std::vector<int> prompt_idx, event_idx;
    prompt_idx.reserve(static_cast<std::size_t>(batch) * t);
    event_idx.reserve(static_cast<std::size_t>(batch) * t);
    for (int b = 0; b < batch; ++b)
      for (int s = 0; s < t; ++s) {
        prompt_idx.push_back(s);
        event_idx.push_back(b);
      }
    TensorPtr tiled_p = ops::gather_rows(tape, prompts, prompt_idx);
    TensorPtr tiled_e = ops::gather_rows(tape, e_hat, event_idx);
    return concat_proj.forward(tape, ops::hcat(tape, tiled_p, tiled_e));
  }
  // Transf: run one encoder layer per instance over T+1 tokens (the T shared
  // prompts plus that instance's event token) and keep the first T outputs.
  std::vector<int> in_idx;
  in_idx.reserve(static_cast<std::size_t>(batch) * (t + 1));
  for (int b = 0; b < batch; ++b) {
    for (int s = 0; s < t; ++s) in_idx.push_back(s);
    in_idx.push_back(t + b);  // event token row inside vcat(prompts, e_hat)
  }
  TensorPtr stacked_in = ops::gather_rows(tape, ops::vcat(tape, prompts, e_hat), in_idx);
  Mask attn = full_mask(t + 1);
  TensorPtr out = agg.forward(tape, stacked_in, t + 1, attn);
  std::vector<int> keep;
  keep.reserve(static_cast<std::size_t>(batch) * t);
  for (int b = 0; b < batch; ++b)
    for (int s = 0; s < t; ++s) keep.push_back(b * (t + 1) + s);
  return ops::gather_rows(tape, out, keep);
}

TensorPtr event_loss(Tape& tape, const EventPromptGenerator& epg, const TensorPtr& e_hat, int y_e,
                     int num_events) {
  if (y_e < 0 || y_e >= num_events) throw std::invalid_argument("event_loss: label out of range");
  return ops::nll_rows(tape, epg.event_logits(tape, e_hat), {y_e});
}

}  // namespace e3p

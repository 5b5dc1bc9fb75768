#pragma once

#include <vector>

#include "e3p/nn.hpp"
#include "e3p/tensor.hpp"

namespace e3p {

// The two feature embedding MLPs (512 -> 256 -> 128), separate parameters for
// visual states and text representations.
struct FeatureMlps {
  Mlp2 visual, text;
  static FeatureMlps create(ParamStore& ps, int in_dim, int hidden, int out_dim, RandomStream& rng);
};

// Transformer feature extractor over the sequence [o_s, p_1^e ... p_T^e, o_g].
struct Backbone {
  std::vector<EncoderLayer> layers;
  TensorPtr positions;  // sinusoidal table, (T+2) x dim, fixed

  static Backbone create(ParamStore& ps, int num_layers, int dim, int heads, int ffn_dim, int horizon,
                         RandomStream& rng);

  // Single-instance assembly: boundary embeddings are 1 x dim, prompts T x dim.
  TensorPtr assemble(Tape& tape, const TensorPtr& o_s_emb, const TensorPtr& prompts_e,
                     const TensorPtr& o_g_emb) const;

  // Batched assembly: vis is 2B x dim with rows (o_s_0, o_g_0, o_s_1, ...),
  // prompts_e is (B*T) x dim stacked; returns (B*(T+2)) x dim in sequence order.
  TensorPtr assemble_batch(Tape& tape, const TensorPtr& vis, const TensorPtr& prompts_e,
                           int horizon) const;

  // Adds positional encoding and runs the encoder stack; q is stacked blocks
  // of T+2 tokens. Returns the same stacked shape.
  TensorPtr forward(Tape& tape, const TensorPtr& q, int horizon) const;

  // Keeps the middle T action tokens of every block.
  TensorPtr extract_middle(Tape& tape, const TensorPtr& out, int horizon) const;
};

}  // namespace e3p

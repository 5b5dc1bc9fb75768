#pragma once

#include <vector>

#include "e3p/mask.hpp"
#include "e3p/nn.hpp"
#include "e3p/tensor.hpp"

namespace e3p {

// Action relation mining: masked self-attention layers over the action tokens
// followed by a feed-forward network. Attention uses the relation mask (zero
// diagonal), so a token is predicted from the other tokens; the module-level
// residual lives in refine().
struct ArmStack {
  struct AttnLayer {
    Linear wq, wk, wv, wo;
  };
  std::vector<AttnLayer> attn;
  FeedForward ffn;
  int heads = 4;

  static ArmStack create(ParamStore& ps, int num_layers, int dim, int heads, int ffn_dim,
                         RandomStream& rng);

  // a_hat is (B*T) x dim stacked action tokens; the same mask is shared by
  // every attention layer of the pass.
  TensorPtr forward(Tape& tape, const TensorPtr& a_hat, int horizon, const Mask& mask) const;
};

// Residual connection producing the final action tokens.
TensorPtr refine(Tape& tape, const TensorPtr& a_hat, const TensorPtr& a_check);

}  // namespace e3p

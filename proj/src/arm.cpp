#include "e3p/arm.hpp"

#include <stdexcept>

#include "e3p/common.hpp"

namespace e3p {

ArmStack ArmStack::create(ParamStore& ps, int num_layers, int dim, int heads, int ffn_dim,
                          RandomStream& rng) {
  if (num_layers < 1) throw std::invalid_argument("ArmStack: need at least one attention layer");
  ArmStack arm;
  arm.heads = heads;
  for (int l = 0; l < num_layers; ++l) {
    const std::string prefix = "arm.attn" + std::to_string(l);
    AttnLayer layer;
    layer.wq = Linear::create(ps, prefix + ".wq", dim, dim, rng);
    layer.wk = Linear::create(ps, prefix + ".wk", dim, dim, rng);
    layer.wv = Linear::create(ps, prefix + ".wv", dim, dim, rng);
    layer.wo = Linear::create(ps, prefix + ".wo", dim, dim, rng);
    arm.attn.push_back(std::move(layer));
  }
  arm.ffn = FeedForward::create(ps, "arm.ffn", dim, ffn_dim, rng);
  return arm;
}

TensorPtr ArmStack::forward(Tape& tape, const TensorPtr& a_hat, int horizon, const Mask& mask) const {
  mask.validate();
  if (mask.t != horizon) throw ShapeError("arm: mask size does not match horizon");
  TensorPtr x = a_hat;
  for (const AttnLayer& layer : attn) {
    TensorPtr a = ops::attention(tape, layer.wq.forward(tape, x), layer.wk.forward(tape, x),
                                 layer.wv.forward(tape, x), heads, horizon, mask);
    x = layer.wo.forward(tape, a);
  }
  return ffn.forward(tape, x);
}

TensorPtr refine(Tape& tape, const TensorPtr& a_hat, const TensorPtr& a_check) {
  if (a_hat->shape != a_check->shape) throw ShapeError("refine: token shapes disagree");
  return ops::add(tape, a_hat, a_check);
}

}  // namespace e3p

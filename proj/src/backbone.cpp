#include "e3p/backbone.hpp"

#include "e3p/common.hpp"

namespace e3p {

FeatureMlps FeatureMlps::create(ParamStore& ps, int in_dim, int hidden, int out_dim, RandomStream& rng) {
  FeatureMlps f;
  f.visual = Mlp2::create(ps, "feat.visual", in_dim, hidden, out_dim, rng);
  f.text = Mlp2::create(ps, "feat.text", in_dim, hidden, out_dim, rng);
  return f;
}

Backbone Backbone::create(ParamStore& ps, int num_layers, int dim, int heads, int ffn_dim, int horizon,
                          RandomStream& rng) {
  Backbone b;
  for (int l = 0; l < num_layers; ++l)
    b.layers.push_back(EncoderLayer::create(ps, "backbone.layer" + std::to_string(l), dim, heads,
                                            ffn_dim, rng));
  b.positions = constant({horizon + 2, dim}, sinusoidal_table(horizon + 2, dim));
  return b;
}

TensorPtr Backbone::assemble(Tape& tape, const TensorPtr& o_s_emb, const TensorPtr& prompts_e,
                             const TensorPtr& o_g_emb) const {
  TensorPtr vis = ops::vcat(tape, o_s_emb, o_g_emb);  // rows: o_s, o_g
  return assemble_batch(tape, vis, prompts_e, prompts_e->rows());
}

TensorPtr Backbone::assemble_batch(Tape& tape, const TensorPtr& vis, const TensorPtr& prompts_e,
                                   int horizon) const {
  const int t = horizon;
  if (vis->rows() % 2 != 0) throw ShapeError("assemble: expected start/goal row pairs");
  const int batch = vis->rows() / 2;
  if (prompts_e->rows() != batch * t) throw ShapeError("assemble: prompt rows do not match batch");
  if (vis->cols() != prompts_e->cols()) throw ShapeError("assemble: dimension mismatch");
  // Sequence order per instance: [o_s, p_1^e ... p_T^e, o_g].
  TensorPtr all = ops::vcat(tape, vis, prompts_e);
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(batch) * (t + 2));
  for (int b = 0; b < batch; ++b) {
    idx.push_back(2 * b);
    for (int s = 0; s < t; ++s) idx.push_back(2 * batch + b * t + s);
    idx.push_back(2 * b + 1);
  }
  return ops::gather_rows(tape, all, idx);
}

TensorPtr Backbone::forward(Tape& tape, const TensorPtr& q, int horizon) const {
  const int block = horizon + 2;
  if (positions->rows() != block) throw ShapeError("backbone: built for a different horizon");
  TensorPtr x = ops::add_block_broadcast(tape, q, positions);
  Mask attn = full_mask(block);
  for (const EncoderLayer& layer : layers) x = layer.forward(tape, x, block, attn);
  return x;
}

TensorPtr Backbone::extract_middle(Tape& tape, const TensorPtr& out, int horizon) const {
  const int block = horizon + 2;
  if (out->rows() % block != 0) throw ShapeError("extract_middle: rows not a multiple of T+2");
  const int batch = out->rows() / block;
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(batch) * horizon);
  for (int b = 0; b < batch; ++b)
    for (int s = 1; s <= horizon; ++s) idx.push_back(b * block + s);
  return ops::gather_rows(tape, out, idx);
}

}  // namespace e3p

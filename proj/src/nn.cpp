#include "e3p/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "e3p/common.hpp"

namespace e3p {

TensorPtr ParamStore::insert(const std::string& name, TensorPtr t) {
  if (index_.count(name)) throw std::logic_error("ParamStore: duplicate parameter " + name);
  index_[name] = items_.size();
  items_.emplace_back(name, t);
  return t;
}

TensorPtr ParamStore::create_gaussian(const std::string& name, std::vector<int> shape, double stddev,
                                      RandomStream& rng) {
  auto t = make_tensor(std::move(shape), true);
  for (double& v : t->values) v = stddev * rng.gaussian();
  return insert(name, std::move(t));
}

TensorPtr ParamStore::create_filled(const std::string& name, std::vector<int> shape, double fill) {
  auto t = make_tensor(std::move(shape), true);
  for (double& v : t->values) v = fill;
  return insert(name, std::move(t));
}

TensorPtr ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
  return items_[it->second].second;
}

void ParamStore::zero_grads() {
  for (auto& [name, t] : items_) {
    t->ensure_grad();
    t->zero_grad();
  }
}

std::size_t ParamStore::total_values() const {
  std::size_t n = 0;
  for (const auto& [name, t] : items_) n += t->values.size();
  return n;
}

double xavier_stddev(int fan_in, int fan_out) { return std::sqrt(2.0 / (fan_in + fan_out)); }

Linear Linear::create(ParamStore& ps, const std::string& prefix, int in, int out, RandomStream& rng) {
  Linear l;
  l.w = ps.create_gaussian(prefix + ".w", {in, out}, xavier_stddev(in, out), rng);
  l.b = ps.create_filled(prefix + ".b", {out}, 0.0);
  return l;
}

TensorPtr Linear::forward(Tape& tape, const TensorPtr& x) const {
  return ops::add_row_broadcast(tape, ops::matmul(tape, x, w), b);
}

Mlp2 Mlp2::create(ParamStore& ps, const std::string& prefix, int in, int hidden, int out,
                  RandomStream& rng) {
  Mlp2 m;
  m.l1 = Linear::create(ps, prefix + ".l1", in, hidden, rng);
  m.l2 = Linear::create(ps, prefix + ".l2", hidden, out, rng);
  return m;
}

TensorPtr Mlp2::forward(Tape& tape, const TensorPtr& x) const {
  return l2.forward(tape, ops::relu(tape, l1.forward(tape, x)));
}

LayerNorm LayerNorm::create(ParamStore& ps, const std::string& prefix, int dim) {
  LayerNorm ln;
  ln.gain = ps.create_filled(prefix + ".gain", {dim}, 1.0);
  ln.bias = ps.create_filled(prefix + ".bias", {dim}, 0.0);
  return ln;
}

TensorPtr LayerNorm::forward(Tape& tape, const TensorPtr& x) const {
  return ops::layer_norm(tape, x, gain, bias);
}

FeedForward FeedForward::create(ParamStore& ps, const std::string& prefix, int dim, int ffn_dim,
                                RandomStream& rng) {
  FeedForward f;
  f.l1 = Linear::create(ps, prefix + ".l1", dim, ffn_dim, rng);
  f.l2 = Linear::create(ps, prefix + ".l2", ffn_dim, dim, rng);
  return f;
}

TensorPtr FeedForward::forward(Tape& tape, const TensorPtr& x) const {
  return l2.forward(tape, ops::relu(tape, l1.forward(tape, x)));
}

EncoderLayer EncoderLayer::create(ParamStore& ps, const std::string& prefix, int dim, int heads,
                                  int ffn_dim, RandomStream& rng) {
  if (dim % heads != 0) throw ShapeError("EncoderLayer: dim must be divisible by heads");
  EncoderLayer e;
  e.ln1 = LayerNorm::create(ps, prefix + ".ln1", dim);
  e.ln2 = LayerNorm::create(ps, prefix + ".ln2", dim);
  e.wq = Linear::create(ps, prefix + ".wq", dim, dim, rng);
  e.wk = Linear::create(ps, prefix + ".wk", dim, dim, rng);
  e.wv = Linear::create(ps, prefix + ".wv", dim, dim, rng);
  e.wo = Linear::create(ps, prefix + ".wo", dim, dim, rng);
  e.ffn = FeedForward::create(ps, prefix + ".ffn", dim, ffn_dim, rng);
  e.heads = heads;
  return e;
}

TensorPtr EncoderLayer::forward(Tape& tape, const TensorPtr& x, int block_len, const Mask& mask) const {
  TensorPtr h = ln1.forward(tape, x);
  TensorPtr a = ops::attention(tape, wq.forward(tape, h), wk.forward(tape, h), wv.forward(tape, h),
                               heads, block_len, mask);
  TensorPtr x1 = ops::add(tape, x, wo.forward(tape, a));
  TensorPtr h2 = ln2.forward(tape, x1);
  return ops::add(tape, x1, ffn.forward(tape, h2));
}

std::vector<double> sinusoidal_table(int length, int dim) {
  std::vector<double> table(static_cast<std::size_t>(length) * dim);
  for (int p = 0; p < length; ++p) {
    for (int i = 0; i < dim; i += 2) {
      const double rate = std::pow(10000.0, -static_cast<double>(i) / dim);
      table[static_cast<std::size_t>(p) * dim + i] = std::sin(p * rate);
      if (i + 1 < dim) table[static_cast<std::size_t>(p) * dim + i + 1] = std::cos(p * rate);
    }
  }
  return table;
}

}  // namespace e3p

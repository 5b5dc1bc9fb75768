#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "e3p/mask.hpp"
#include "e3p/ops.hpp"
#include "e3p/rng.hpp"
#include "e3p/tensor.hpp"

namespace e3p {

// Named trainable tensors in a fixed creation order, so initialization draws
// and optimizer sweeps are deterministic.
class ParamStore {
 public:
  TensorPtr create_gaussian(const std::string& name, std::vector<int> shape, double stddev,
                            RandomStream& rng);
  TensorPtr create_filled(const std::string& name, std::vector<int> shape, double fill);
  TensorPtr get(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  const std::vector<std::pair<std::string, TensorPtr>>& items() const { return items_; }
  void zero_grads();
  std::size_t total_values() const;

 private:
  TensorPtr insert(const std::string& name, TensorPtr t);
  std::vector<std::pair<std::string, TensorPtr>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

double xavier_stddev(int fan_in, int fan_out);

struct Linear {
  TensorPtr w;  // in x out
  TensorPtr b;  // out
  static Linear create(ParamStore& ps, const std::string& prefix, int in, int out, RandomStream& rng);
  TensorPtr forward(Tape& tape, const TensorPtr& x) const;
};

// Two-layer MLP with a ReLU between the layers.
struct Mlp2 {
  Linear l1, l2;
  static Mlp2 create(ParamStore& ps, const std::string& prefix, int in, int hidden, int out,
                     RandomStream& rng);
  TensorPtr forward(Tape& tape, const TensorPtr& x) const;
};

struct LayerNorm {
  TensorPtr gain, bias;
  static LayerNorm create(ParamStore& ps, const std::string& prefix, int dim);
  TensorPtr forward(Tape& tape, const TensorPtr& x) const;
};

// Position-wise feed-forward block: dim -> ffn_dim -> ReLU -> dim.
struct FeedForward {
  Linear l1, l2;
  static FeedForward create(ParamStore& ps, const std::string& prefix, int dim, int ffn_dim,
                            RandomStream& rng);
  TensorPtr forward(Tape& tape, const TensorPtr& x) const;
};

// Pre-layer-norm transformer encoder layer over stacked blocks of rows.
struct EncoderLayer {
  LayerNorm ln1, ln2;
  Linear wq, wk, wv, wo;
  FeedForward ffn;
  int heads = 4;
  static EncoderLayer create(ParamStore& ps, const std::string& prefix, int dim, int heads,
                             int ffn_dim, RandomStream& rng);
  TensorPtr forward(Tape& tape, const TensorPtr& x, int block_len, const Mask& mask) const;
};

// Standard sinusoidal position table, length x dim row-major.
std::vector<double> sinusoidal_table(int length, int dim);

}  // namespace e3p

#pragma once

#include <vector>

#include "e3p/mask.hpp"
#include "e3p/tensor.hpp"

namespace e3p::ops {

// All ops validate shapes, reject non-finite outputs, and record their
// backward closure on the tape when gradients are enabled and some input
// requires them. Tensors are 2-d unless noted; a 1-d tensor acts as one row.

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr transpose(Tape& tape, const TensorPtr& a);
TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape& tape, const TensorPtr& a, double c);
TensorPtr relu(Tape& tape, const TensorPtr& a);
TensorPtr sum(Tape& tape, const TensorPtr& a);

// X[m x n] + bias[n], per row.
TensorPtr add_row_broadcast(Tape& tape, const TensorPtr& x, const TensorPtr& bias);

// X[(B*S) x n] + p[S x n], repeated for every block of S rows.
TensorPtr add_block_broadcast(Tape& tape, const TensorPtr& x, const TensorPtr& p);

// Row-wise layer normalization with learnable gain/bias.
TensorPtr layer_norm(Tape& tape, const TensorPtr& x, const TensorPtr& gain, const TensorPtr& bias,
                     double eps = 1e-5);

// Row softmax over positions with mask 1; positions with mask 0 get weight
// exactly 0 (additive -1e30 pre-softmax, exact zeroing after).
TensorPtr masked_softmax(Tape& tape, const TensorPtr& logits, const Mask& mask);

// Fused multi-head attention over independent blocks of block_len rows.
// q, k, v are (B*block_len) x d stacked; the same mask applies to each block.
TensorPtr attention(Tape& tape, const TensorPtr& q, const TensorPtr& k, const TensorPtr& v,
                    int heads, int block_len, const Mask& mask);

// out row r = x row idx[r]; backward scatter-adds (fan-out safe).
TensorPtr gather_rows(Tape& tape, const TensorPtr& x, std::vector<int> idx);

TensorPtr vcat(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr hcat(Tape& tape, const TensorPtr& a, const TensorPtr& b);

// Sum over rows of -log softmax(row)[label]. Callers divide for a mean.
TensorPtr nll_rows(Tape& tape, const TensorPtr& logits, const std::vector<int>& labels);

}  // namespace e3p::ops

#pragma once

#include <vector>

#include "e3p/prompts.hpp"
#include "e3p/tensor.hpp"

namespace e3p {

struct LossReport {
  double l_action = 0.0;
  double l_event = 0.0;
  double total = 0.0;
};

// Per-step contrastive action loss for one instance: sum over steps of the
// negative log-softmax of raw dot products l_j . a_t, at the ground-truth
// index. a_tokens holds T rows (1 x d each), banks one candidate set per step.
TensorPtr action_loss(Tape& tape, const std::vector<TensorPtr>& a_tokens,
                      const std::vector<ActionBank>& banks);

// Unweighted sum of the two objective terms; l_event may be null (EPG
// ablation), in which case the total equals the action term and the event
// term is reported as zero.
struct TotalLoss {
  TensorPtr value;
  LossReport report;
};
TotalLoss total_loss(Tape& tape, const TensorPtr& l_action, const TensorPtr& l_event);

}  // namespace e3p

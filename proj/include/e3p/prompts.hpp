#pragma once

#include <string>

#include "e3p/nn.hpp"
#include "e3p/tensor.hpp"
#include "e3p/world.hpp"

namespace e3p {

// Hand-crafted prompt template with an order blank and an action blank.
inline constexpr const char* kPromptTemplate = "[order], this action is to [action]";
inline constexpr int kMaxHorizon = 6;

// Ordinal word for step t in 1..6.
std::string ordinal(int t);

// Template with the order blank filled and the action blank left as the
// literal token "[action]" (the action is unknown at input time).
std::string input_prompt(int t);

// Template with both blanks filled.
std::string supervision_text(int t, const std::string& action_name);

// Per-step candidate set: one text representation per action in the world,
// all sharing step t's ordinal, so the contrast is over actions only.
struct ActionBank {
  int step = 0;        // 1-based
  TensorPtr vectors;   // N x d, one row per action id
  int gt_index = -1;   // selector for the ground-truth row, -1 if unset
};

ActionBank build_bank(Tape& tape, const World& world, int t, const Mlp2& text_mlp, int gt_index = -1);

}  // namespace e3p

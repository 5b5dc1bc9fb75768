#include "e3p/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "e3p/common.hpp"
#include "e3p/ops.hpp"

namespace e3p {

TensorPtr action_loss(Tape& tape, const std::vector<TensorPtr>& a_tokens,
                      const std::vector<ActionBank>& banks) {
  if (a_tokens.empty()) throw std::invalid_argument("action_loss: no action tokens");
  if (a_tokens.size() != banks.size())
    throw ShapeError("action_loss: one candidate bank per step required");
  TensorPtr total;
  for (std::size_t t = 0; t < a_tokens.size(); ++t) {
    const ActionBank& bank = banks[t];
    if (bank.vectors->rows() < 2) throw std::invalid_argument("action_loss: need at least 2 candidates");
    if (bank.gt_index < 0 || bank.gt_index >= bank.vectors->rows())
      throw std::invalid_argument("action_loss: bank has no valid gt_index");
    TensorPtr logits = ops::matmul(tape, a_tokens[t], ops::transpose(tape, bank.vectors));
    TensorPtr nll = ops::nll_rows(tape, logits, {bank.gt_index});
    total = total ? ops::add(tape, total, nll) : nll;
  }
  return total;
}

TotalLoss total_loss(Tape& tape, const TensorPtr& l_action, const TensorPtr& l_event) {
  if (!l_action || !l_action->is_scalar()) throw ShapeError("total_loss: action term must be a scalar");
  if (!std::isfinite(l_action->values[0])) throw NonFiniteError("total_loss: action term is not finite");
  TotalLoss out;
  out.report.l_action = l_action->values[0];
  if (l_event) {
    if (!l_event->is_scalar()) throw ShapeError("total_loss: event term must be a scalar");
    if (!std::isfinite(l_event->values[0])) throw NonFiniteError("total_loss: event term is not finite");
    out.report.l_event = l_event->values[0];
    out.value = ops::add(tape, l_action, l_event);
  } else {
    out.report.l_event = 0.0;
    out.value = l_action;
  }
  out.report.total = out.value->values[0];
  return out;
}

}  // namespace e3p

#include "e3p/mask.hpp"

#include <stdexcept>
#include <string>

namespace e3p {

bool Mask::row_has_one(int i) const {
  for (int j = 0; j < t; ++j)
    if (at(i, j)) return true;
  return false;
}

void Mask::validate() const {
  if (static_cast<int>(on.size()) != t * t) throw std::logic_error("Mask: size does not match t");
  for (int i = 0; i < t; ++i) {
    if (at(i, i) != 0) throw std::logic_error("Mask: diagonal entry is not zero at row " + std::to_string(i));
    if (!row_has_one(i)) throw std::logic_error("Mask: row " + std::to_string(i) + " is all zeros");
  }
}

MaskCounters& mask_counters() {
  static MaskCounters counters;
  return counters;
}

Mask deterministic_mask(int t) {
  if (t < 2) throw std::invalid_argument("deterministic_mask: t must be >= 2");
  Mask m;
  m.t = t;
  m.kind = MaskKind::deterministic;
  m.on.assign(static_cast<std::size_t>(t) * t, 1);
  for (int i = 0; i < t; ++i) m.on[static_cast<std::size_t>(i) * t + i] = 0;
  ++mask_counters().deterministic;
  return m;
}

Mask drop_relation_mask(int t, double tau, RandomStream& rng) {
  if (t < 2) throw std::invalid_argument("drop_relation_mask: t must be >= 2");
  if (tau < 0.0 || tau >= 1.0) throw std::invalid_argument("drop_relation_mask: tau must be in [0, 1)");
  Mask m;
  m.t = t;
  m.kind = MaskKind::probabilistic;
  m.drop_rate = tau;
  m.on.assign(static_cast<std::size_t>(t) * t, 0);
  for (int i = 0; i < t; ++i) {
    int kept = 0;
    for (int j = 0; j < t; ++j) {
      if (i == j) continue;
      double alpha = rng.uniform();
      if (alpha > tau) {
        m.on[static_cast<std::size_t>(i) * t + j] = 1;
        ++kept;
      }
    }
    if (kept == 0) {
      // Every off-diagonal entry was dropped; re-enable one uniformly so no
      // row drops more than t-2 connections.
      int k = rng.uniform_int(t - 1);
      int j = k < i ? k : k + 1;
      m.on[static_cast<std::size_t>(i) * t + j] = 1;
    }
  }
  ++mask_counters().probabilistic;
  return m;
}

Mask full_mask(int t) {
  if (t < 1) throw std::invalid_argument("full_mask: t must be >= 1");
  Mask m;
  m.t = t;
  m.kind = MaskKind::full;
  m.on.assign(static_cast<std::size_t>(t) * t, 1);
  ++mask_counters().full;
  return m;
}

}  // namespace e3p

#pragma once

#include <cstdint>
#include <vector>

#include "e3p/rng.hpp"

namespace e3p {

enum class MaskKind { deterministic, probabilistic, full };

// T x T binary attention mask; rows index queries, columns keys.
// The deterministic kind is all ones with a zero diagonal; the probabilistic
// kind additionally drops off-diagonal entries with probability drop_rate,
// never dropping more than T-2 entries in a row. The full kind (all ones) is
// ordinary self-attention, used outside the relation-mining stack.
struct Mask {
  int t = 0;
  MaskKind kind = MaskKind::deterministic;
  double drop_rate = 0.0;
  std::vector<std::uint8_t> on;

  std::uint8_t at(int i, int j) const { return on[static_cast<std::size_t>(i) * t + j]; }
  bool row_has_one(int i) const;

  // Checks the relation-mask invariants (zero diagonal, >= 1 one per row).
  void validate() const;
};

// Instrumentation: counts of masks sampled by kind since process start.
// The evaluation pipeline asserts that no probabilistic mask is drawn.
struct MaskCounters {
  std::uint64_t deterministic = 0;
  std::uint64_t probabilistic = 0;
  std::uint64_t full = 0;
};
MaskCounters& mask_counters();

Mask deterministic_mask(int t);
Mask drop_relation_mask(int t, double tau, RandomStream& rng);
Mask full_mask(int t);

}  // namespace e3p

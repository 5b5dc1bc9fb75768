#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "e3p/tensor.hpp"

namespace e3p {

struct GradCheckOptions {
  double h = 1e-6;
  // Coordinates checked per tensor; -1 checks every coordinate.
  int samples_per_tensor = -1;
  std::uint64_t seed = 0;
};

// Compares analytic gradients of the taped scalar f against central finite
// differences over the given parameters and returns the maximum relative
// error |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// f must be deterministic (stochastic masks frozen).
double grad_check(const std::function<TensorPtr(Tape&)>& f, const std::vector<TensorPtr>& params,
                  const GradCheckOptions& opt = {});

}  // namespace e3p

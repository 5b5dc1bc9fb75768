#include "e3p/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "e3p/rng.hpp"

namespace e3p {

namespace {

double forward_value(const std::function<TensorPtr(Tape&)>& f) {
  Tape tape;
  NoGradGuard guard(tape);
  return f(tape)->values[0];
}

}  // namespace

double grad_check(const std::function<TensorPtr(Tape&)>& f, const std::vector<TensorPtr>& params,
                  const GradCheckOptions& opt) {
  for (const auto& p : params) {
    p->ensure_grad();
    p->zero_grad();
  }
  {
    Tape tape;
    TensorPtr loss = f(tape);
    tape.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p->grad);

  RandomStream rng(opt.seed);
  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    std::vector<std::size_t> coords;
    const std::size_t n = p->values.size();
    if (opt.samples_per_tensor < 0 || static_cast<std::size_t>(opt.samples_per_tensor) >= n) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      for (int s = 0; s < opt.samples_per_tensor; ++s)
        coords.push_back(static_cast<std::size_t>(rng.uniform_int(static_cast<int>(n))));
      std::sort(coords.begin(), coords.end());
      coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    }
    for (std::size_t c : coords) {
      const double saved = p->values[c];
      p->values[c] = saved + opt.h;
      const double lp = forward_value(f);
      p->values[c] = saved - opt.h;
      const double lm = forward_value(f);
      p->values[c] = saved;
      const double numeric = (lp - lm) / (2.0 * opt.h);
      const double a = analytic[pi][c];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace e3p

#include "e3p/tensor.hpp"

#include <algorithm>
#include <stdexcept>

#include "e3p/common.hpp"

namespace e3p {

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

int Tensor::rows() const { return shape.size() >= 2 ? shape[0] : 1; }

int Tensor::cols() const {
  if (shape.empty()) return 1;
  return shape.size() >= 2 ? shape[1] : shape[0];
}

void Tensor::ensure_grad() {
  if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

TensorPtr make_tensor(std::vector<int> shape, bool requires_grad) {
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->values.assign(t->numel(), 0.0);
  t->requires_grad = requires_grad;
  if (requires_grad) t->ensure_grad();
  return t;
}

TensorPtr constant(std::vector<int> shape, std::vector<double> values) {
  auto t = std::make_shared<Tensor>();
  t->shape = std::move(shape);
  t->values = std::move(values);
  if (t->numel() != t->values.size()) throw ShapeError("constant: shape does not match value count");
  return t;
}

TensorPtr scalar_tensor(double v) { return constant({1}, {v}); }

void Tape::record(std::function<void()> step) {
  if (grad_enabled_) steps_.push_back(std::move(step));
}

void Tape::backward(const TensorPtr& loss) {
  if (!loss->is_scalar()) throw ShapeError("backward: loss must be a scalar");
  if (steps_.empty()) throw std::logic_error("backward: tape is empty");
  if (!loss->requires_grad) throw std::logic_error("backward: loss does not depend on any tracked tensor");
  loss->ensure_grad();
  loss->grad[0] = 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

}  // namespace e3p

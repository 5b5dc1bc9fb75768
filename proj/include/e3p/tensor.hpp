#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace e3p {

// Dense row-major tensor of 64-bit floats. Values are written once by the
// producing op; the grad buffer exists iff requires_grad and is accumulated
// into additively during the backward sweep.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;
  bool requires_grad = false;
  std::vector<double> grad;

  std::size_t numel() const;
  bool is_scalar() const { return numel() == 1; }

  // 2-d accessors; a 1-d tensor behaves as a single row.
  int rows() const;
  int cols() const;
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols() + c]; }

  void ensure_grad();
  void zero_grad();
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr make_tensor(std::vector<int> shape, bool requires_grad = false);
TensorPtr constant(std::vector<int> shape, std::vector<double> values);
TensorPtr scalar_tensor(double v);

// Reverse-mode tape. Ops append their backward closures in execution order;
// inputs of every op were recorded before it, so replaying the closures in
// reverse is a topological traversal that visits each op exactly once.
class Tape {
 public:
  void record(std::function<void()> step);
  void backward(const TensorPtr& loss);

  bool grad_enabled() const { return grad_enabled_; }
  void set_grad_enabled(bool on) { grad_enabled_ = on; }

  std::size_t size() const { return steps_.size(); }
  void clear() { steps_.clear(); }

 private:
  std::vector<std::function<void()>> steps_;
  bool grad_enabled_ = true;
};

// Scoped forward-only mode (no closure recording, outputs carry no grad).
class NoGradGuard {
 public:
  explicit NoGradGuard(Tape& tape) : tape_(tape), prev_(tape.grad_enabled()) {
    tape_.set_grad_enabled(false);
  }
  ~NoGradGuard() { tape_.set_grad_enabled(prev_); }

 private:
  Tape& tape_;
  bool prev_;
};

}  // namespace e3p

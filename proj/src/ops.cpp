#include "e3p/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "e3p/common.hpp"

namespace e3p::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConst = Eigen::Map<const RowMat>;

MapConst as_mat(const TensorPtr& t) { return MapConst(t->values.data(), t->rows(), t->cols()); }
MapMat as_mat_mut(TensorPtr& t) { return MapMat(t->values.data(), t->rows(), t->cols()); }
MapMat grad_mat(const TensorPtr& t) {
  return MapMat(const_cast<double*>(t->grad.data()), t->rows(), t->cols());
}

void check_finite(const Tensor& t, const char* op) {
  for (double v : t.values) {
    if (!std::isfinite(v)) throw NonFiniteError(std::string(op) + ": produced a non-finite value");
  }
}

bool track(Tape& tape, std::initializer_list<const TensorPtr*> inputs) {
  if (!tape.grad_enabled()) return false;
  for (const TensorPtr* p : inputs) {
    if ((*p)->requires_grad) return true;
  }
  return false;
}

TensorPtr make_output(std::vector<int> shape, bool requires_grad) {
  return make_tensor(std::move(shape), requires_grad);
}

void require_2d(const TensorPtr& t, const char* op) {
  if (t->shape.size() != 2) throw ShapeError(std::string(op) + ": expected a 2-d tensor");
}

void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
  if (a->shape != b->shape) throw ShapeError(std::string(op) + ": shape mismatch");
}

constexpr double kMaskOffset = -1e30;

// Row softmax of `logits` under `mask` written into `out`; masked entries are
// exactly zero. Throws AllMaskedRow on a row whose mask is all zeros.
void masked_softmax_rows(const double* logits, const Mask& mask, double* out, int t) {
  for (int i = 0; i < t; ++i) {
    const double* x = logits + static_cast<std::size_t>(i) * t;
    double* y = out + static_cast<std::size_t>(i) * t;
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int j = 0; j < t; ++j) {
      double z = mask.at(i, j) ? x[j] : x[j] + kMaskOffset;
      if (mask.at(i, j)) any = true;
      if (z > mx) mx = z;
    }
    if (!any) throw AllMaskedRow("masked_softmax: row " + std::to_string(i) + " is fully masked");
    double s = 0.0;
    for (int j = 0; j < t; ++j) {
      double z = mask.at(i, j) ? x[j] : x[j] + kMaskOffset;
      y[j] = std::exp(z - mx);
      s += y[j];
    }
    for (int j = 0; j < t; ++j) y[j] = mask.at(i, j) ? y[j] / s : 0.0;
  }
}

// d(logits) += softmax-jacobian^T dy, rows independent; masked entries stay 0.
void softmax_backward_rows(const double* y, const double* dy, double* dx, int rows, int cols) {
  for (int i = 0; i < rows; ++i) {
    const double* yi = y + static_cast<std::size_t>(i) * cols;
    const double* dyi = dy + static_cast<std::size_t>(i) * cols;
    double* dxi = dx + static_cast<std::size_t>(i) * cols;
    double dot = 0.0;
    for (int j = 0; j < cols; ++j) dot += yi[j] * dyi[j];
    for (int j = 0; j < cols; ++j) dxi[j] += yi[j] * (dyi[j] - dot);
  }
}

}  // namespace

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  if (a->shape[1] != b->shape[0]) throw ShapeError("matmul: inner dimensions disagree");
  auto out = make_output({a->shape[0], b->shape[1]}, track(tape, {&a, &b}));
  as_mat_mut(out).noalias() = as_mat(a) * as_mat(b);
  check_finite(*out, "matmul");
  if (out->requires_grad) {
    tape.record([a, b, out] {
      if (a->requires_grad) grad_mat(a).noalias() += grad_mat(out) * as_mat(b).transpose();
      if (b->requires_grad) grad_mat(b).noalias() += as_mat(a).transpose() * grad_mat(out);
    });
  }
  return out;
}

TensorPtr transpose(Tape& tape, const TensorPtr& a) {
  require_2d(a, "transpose");
  auto out = make_output({a->shape[1], a->shape[0]}, track(tape, {&a}));
  as_mat_mut(out) = as_mat(a).transpose();
  if (out->requires_grad) {
    tape.record([a, out] {
      if (a->requires_grad) grad_mat(a) += grad_mat(out).transpose();
    });
  }
  return out;
}

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
  require_same_shape(a, b, "add");
  auto out = make_output(a->shape, track(tape, {&a, &b}));
  for (std::size_t i = 0; i < out->values.size(); ++i) out->values[i] = a->values[i] + b->values[i];
  check_finite(*out, "add");
  if (out->requires_grad) {
    tape.record([a, b, out] {
      if (a->requires_grad)
        for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i];
      if (b->requires_grad)
        for (std::size_t i = 0; i < out->grad.size(); ++i) b->grad[i] += out->grad[i];
    });
  }
  return out;
}

TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
  require_same_shape(a, b, "sub");
  auto out = make_output(a->shape, track(tape, {&a, &b}));
  for (std::size_t i = 0; i < out->values.size(); ++i) out->values[i] = a->values[i] - b->values[i];
  check_finite(*out, "sub");
  if (out->requires_grad) {
    tape.record([a, b, out] {
      if (a->requires_grad)
        for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i];
      if (b->requires_grad)
        for (std::size_t i = 0; i < out->grad.size(); ++i) b->grad[i] -= out->grad[i];
    });
  }
  return out;
}

TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
  require_same_shape(a, b, "mul");
  auto out = make_output(a->shape, track(tape, {&a, &b}));
  for (std::size_t i = 0; i < out->values.size(); ++i) out->values[i] = a->values[i] * b->values[i];
  check_finite(*out, "mul");
  if (out->requires_grad) {
    tape.record([a, b, out] {
      if (a->requires_grad)
        for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i] * b->values[i];
      if (b->requires_grad)
        for (std::size_t i = 0; i < out->grad.size(); ++i) b->grad[i] += out->grad[i] * a->values[i];
    });
  }
  return out;
}

TensorPtr scale(Tape& tape, const TensorPtr& a, double c) {
  auto out = make_output(a->shape, track(tape, {&a}));
  for (std::size_t i = 0; i < out->values.size(); ++i) out->values[i] = a->values[i] * c;
  check_finite(*out, "scale");
  if (out->requires_grad) {
    tape.record([a, out, c] {
      if (a->requires_grad)
        for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += c * out->grad[i];
    });
  }
  return out;
}

TensorPtr relu(Tape& tape, const TensorPtr& a) {
  auto out = make_output(a->shape, track(tape, {&a}));
  for (std::size_t i = 0; i < out->values.size(); ++i) out->values[i] = a->values[i] > 0.0 ? a->values[i] : 0.0;
  if (out->requires_grad) {
    tape.record([a, out] {
      if (!a->requires_grad) return;
      for (std::size_t i = 0; i < out->grad.size(); ++i)
        if (a->values[i] > 0.0) a->grad[i] += out->grad[i];
    });
  }
  return out;
}

TensorPtr sum(Tape& tape, const TensorPtr& a) {
  auto out = make_output({1}, track(tape, {&a}));
  double s = 0.0;
  for (double v : a->values) s += v;
  out->values[0] = s;
  check_finite(*out, "sum");
  if (out->requires_grad) {
    tape.record([a, out] {
      if (!a->requires_grad) return;
      const double g = out->grad[0];
      for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += g;
    });
  }
  return out;
}

TensorPtr add_row_broadcast(Tape& tape, const TensorPtr& x, const TensorPtr& bias) {
  require_2d(x, "add_row_broadcast");
  const int n = x->shape[1];
  if (static_cast<int>(bias->numel()) != n) throw ShapeError("add_row_broadcast: bias length mismatch");
  auto out = make_output(x->shape, track(tape, {&x, &bias}));
  const int m = x->shape[0];
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c)
      out->values[static_cast<std::size_t>(r) * n + c] = x->values[static_cast<std::size_t>(r) * n + c] + bias->values[c];
  check_finite(*out, "add_row_broadcast");
  if (out->requires_grad) {
    tape.record([x, bias, out, m, n] {
      if (x->requires_grad)
        for (std::size_t i = 0; i < out->grad.size(); ++i) x->grad[i] += out->grad[i];
      if (bias->requires_grad)
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < n; ++c) bias->grad[c] += out->grad[static_cast<std::size_t>(r) * n + c];
    });
  }
  return out;
}

TensorPtr add_block_broadcast(Tape& tape, const TensorPtr& x, const TensorPtr& p) {
  require_2d(x, "add_block_broadcast");
  require_2d(p, "add_block_broadcast");
  const int n = x->shape[1];
  const int s = p->shape[0];
  if (p->shape[1] != n) throw ShapeError("add_block_broadcast: column mismatch");
  if (s <= 0 || x->shape[0] % s != 0) throw ShapeError("add_block_broadcast: rows not a multiple of block");
  auto out = make_output(x->shape, track(tape, {&x, &p}));
  const int m = x->shape[0];
  for (int r = 0; r < m; ++r) {
    const int pr = r % s;
    for (int c = 0; c < n; ++c)
      out->values[static_cast<std::size_t>(r) * n + c] =
          x->values[static_cast<std::size_t>(r) * n + c] + p->values[static_cast<std::size_t>(pr) * n + c];
  }
  check_finite(*out, "add_block_broadcast");
  if (out->requires_grad) {
    tape.record([x, p, out, m, n, s] {
      if (x->requires_grad)
        for (std::size_t i = 0; i < out->grad.size(); ++i) x->grad[i] += out->grad[i];
      if (p->requires_grad)
        for (int r = 0; r < m; ++r) {
          const int pr = r % s;
          for (int c = 0; c < n; ++c)
            p->grad[static_cast<std::size_t>(pr) * n + c] += out->grad[static_cast<std::size_t>(r) * n + c];
        }
    });
  }
  return out;
}

TensorPtr layer_norm(Tape& tape, const TensorPtr& x, const TensorPtr& gain, const TensorPtr& bias,
                     double eps) {
  require_2d(x, "layer_norm");
  const int m = x->shape[0], n = x->shape[1];
  if (static_cast<int>(gain->numel()) != n || static_cast<int>(bias->numel()) != n)
    throw ShapeError("layer_norm: gain/bias length mismatch");
  auto out = make_output(x->shape, track(tape, {&x, &gain, &bias}));
  auto xhat = std::make_shared<std::vector<double>>(x->values.size());
  auto inv_std = std::make_shared<std::vector<double>>(m);
  for (int r = 0; r < m; ++r) {
    const double* xr = x->values.data() + static_cast<std::size_t>(r) * n;
    double mu = 0.0;
    for (int c = 0; c < n; ++c) mu += xr[c];
    mu /= n;
    double var = 0.0;
    for (int c = 0; c < n; ++c) var += (xr[c] - mu) * (xr[c] - mu);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (int c = 0; c < n; ++c) {
      const double h = (xr[c] - mu) * inv;
      (*xhat)[static_cast<std::size_t>(r) * n + c] = h;
      out->values[static_cast<std::size_t>(r) * n + c] = gain->values[c] * h + bias->values[c];
    }
  }
  check_finite(*out, "layer_norm");
  if (out->requires_grad) {
    tape.record([x, gain, bias, out, xhat, inv_std, m, n] {
      for (int r = 0; r < m; ++r) {
        const double* dyr = out->grad.data() + static_cast<std::size_t>(r) * n;
        const double* hr = xhat->data() + static_cast<std::size_t>(r) * n;
        if (gain->requires_grad)
          for (int c = 0; c < n; ++c) gain->grad[c] += dyr[c] * hr[c];
        if (bias->requires_grad)
          for (int c = 0; c < n; ++c) bias->grad[c] += dyr[c];
        if (x->requires_grad) {
          double mean_wg = 0.0, mean_wgh = 0.0;
          for (int c = 0; c < n; ++c) {
            const double wg = dyr[c] * gain->values[c];
            mean_wg += wg;
            mean_wgh += wg * hr[c];
          }
          mean_wg /= n;
          mean_wgh /= n;
          double* dxr = x->grad.data() + static_cast<std::size_t>(r) * n;
          const double inv = (*inv_std)[r];
          for (int c = 0; c < n; ++c) {
            const double wg = dyr[c] * gain->values[c];
            dxr[c] += inv * (wg - mean_wg - hr[c] * mean_wgh);
          }
        }
      }
    });
  }
  return out;
}

TensorPtr masked_softmax(Tape& tape, const TensorPtr& logits, const Mask& mask) {
  require_2d(logits, "masked_softmax");
  if (logits->shape[0] != mask.t || logits->shape[1] != mask.t)
    throw ShapeError("masked_softmax: logits must be t x t for the given mask");
  auto out = make_output(logits->shape, track(tape, {&logits}));
  masked_softmax_rows(logits->values.data(), mask, out->values.data(), mask.t);
  check_finite(*out, "masked_softmax");
  if (out->requires_grad) {
    const int t = mask.t;
    tape.record([logits, out, t] {
      if (!logits->requires_grad) return;
      softmax_backward_rows(out->values.data(), out->grad.data(), logits->grad.data(), t, t);
    });
  }
  return out;
}

TensorPtr attention(Tape& tape, const TensorPtr& q, const TensorPtr& k, const TensorPtr& v,
                    int heads, int block_len, const Mask& mask) {
  require_2d(q, "attention");
  require_same_shape(q, k, "attention");
  require_same_shape(q, v, "attention");
  const int rows = q->shape[0], d = q->shape[1];
  if (heads <= 0 || d % heads != 0) throw ShapeError("attention: dim not divisible by heads");
  if (block_len <= 0 || rows % block_len != 0) throw ShapeError("attention: rows not a multiple of block_len");
  if (mask.t != block_len) throw ShapeError("attention: mask size does not match block_len");
  for (int i = 0; i < mask.t; ++i)
    if (!mask.row_has_one(i)) throw AllMaskedRow("attention: mask row " + std::to_string(i) + " is all zeros");

  const int nblocks = rows / block_len;
  const int hd = d / heads;
  const double scl = 1.0 / std::sqrt(static_cast<double>(hd));
  auto out = make_output(q->shape, track(tape, {&q, &k, &v}));
  // Attention weights are kept for the backward pass.
  auto weights = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(nblocks) * heads * block_len * block_len);

  MapConst qm = as_mat(q), km = as_mat(k), vm = as_mat(v);
  MapMat om = as_mat_mut(out);
  RowMat scores(block_len, block_len);
  for (int b = 0; b < nblocks; ++b) {
    for (int h = 0; h < heads; ++h) {
      auto qb = qm.block(b * block_len, h * hd, block_len, hd);
      auto kb = km.block(b * block_len, h * hd, block_len, hd);
      auto vb = vm.block(b * block_len, h * hd, block_len, hd);
      scores.noalias() = scl * (qb * kb.transpose());
      double* w = weights->data() +
                  (static_cast<std::size_t>(b) * heads + h) * block_len * block_len;
      masked_softmax_rows(scores.data(), mask, w, block_len);
      Eigen::Map<const RowMat> wm(w, block_len, block_len);
      om.block(b * block_len, h * hd, block_len, hd).noalias() = wm * vb;
    }
  }
  check_finite(*out, "attention");

  if (out->requires_grad) {
    tape.record([q, k, v, out, weights, nblocks, heads, block_len, hd, scl] {
      MapConst qm = as_mat(q), km = as_mat(k), vm = as_mat(v);
      RowMat da(block_len, block_len), ds(block_len, block_len);
      for (int b = 0; b < nblocks; ++b) {
        for (int h = 0; h < heads; ++h) {
          Eigen::Map<const RowMat> wm(weights->data() + (static_cast<std::size_t>(b) * heads + h) *
                                                            block_len * block_len,
                                      block_len, block_len);
          auto dout = grad_mat(out).block(b * block_len, h * hd, block_len, hd);
          auto vb = vm.block(b * block_len, h * hd, block_len, hd);
          if (v->requires_grad)
            grad_mat(v).block(b * block_len, h * hd, block_len, hd).noalias() += wm.transpose() * dout;
          da.noalias() = dout * vb.transpose();
          ds.setZero();
          softmax_backward_rows(wm.data(), da.data(), ds.data(), block_len, block_len);
          if (q->requires_grad)
            grad_mat(q).block(b * block_len, h * hd, block_len, hd).noalias() +=
                scl * (ds * km.block(b * block_len, h * hd, block_len, hd));
          if (k->requires_grad)
            grad_mat(k).block(b * block_len, h * hd, block_len, hd).noalias() +=
                scl * (ds.transpose() * qm.block(b * block_len, h * hd, block_len, hd));
        }
      }
    });
  }
  return out;
}

TensorPtr gather_rows(Tape& tape, const TensorPtr& x, std::vector<int> idx) {
  require_2d(x, "gather_rows");
  const int n = x->shape[1];
  for (int r : idx)
    if (r < 0 || r >= x->shape[0]) throw ShapeError("gather_rows: row index out of range");
  auto out = make_output({static_cast<int>(idx.size()), n}, track(tape, {&x}));
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (int c = 0; c < n; ++c)
      out->values[r * n + c] = x->values[static_cast<std::size_t>(idx[r]) * n + c];
  if (out->requires_grad) {
    tape.record([x, out, idx = std::move(idx), n] {
      if (!x->requires_grad) return;
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (int c = 0; c < n; ++c)
          x->grad[static_cast<std::size_t>(idx[r]) * n + c] += out->grad[r * n + c];
    });
  }
  return out;
}

TensorPtr vcat(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
  require_2d(a, "vcat");
  require_2d(b, "vcat");
  if (a->shape[1] != b->shape[1]) throw ShapeError("vcat: column mismatch");
  auto out = make_output({a->shape[0] + b->shape[0], a->shape[1]}, track(tape, {&a, &b}));
  std::copy(a->values.begin(), a->values.end(), out->values.begin());
  std::copy(b->values.begin(), b->values.end(), out->values.begin() + a->values.size());
  if (out->requires_grad) {
    tape.record([a, b, out] {
      const std::size_t na = a->values.size();
      if (a->requires_grad)
        for (std::size_t i = 0; i < na; ++i) a->grad[i] += out->grad[i];
      if (b->requires_grad)
        for (std::size_t i = 0; i < b->values.size(); ++i) b->grad[i] += out->grad[na + i];
    });
  }
  return out;
}

TensorPtr hcat(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
  require_2d(a, "hcat");
  require_2d(b, "hcat");
  if (a->shape[0] != b->shape[0]) throw ShapeError("hcat: row mismatch");
  const int m = a->shape[0], na = a->shape[1], nb = b->shape[1];
  auto out = make_output({m, na + nb}, track(tape, {&a, &b}));
  for (int r = 0; r < m; ++r) {
    std::copy(a->values.begin() + static_cast<std::size_t>(r) * na,
              a->values.begin() + static_cast<std::size_t>(r + 1) * na,
              out->values.begin() + static_cast<std::size_t>(r) * (na + nb));
    std::copy(b->values.begin() + static_cast<std::size_t>(r) * nb,
              b->values.begin() + static_cast<std::size_t>(r + 1) * nb,
              out->values.begin() + static_cast<std::size_t>(r) * (na + nb) + na);
  }
  if (out->requires_grad) {
    tape.record([a, b, out, m, na, nb] {
      for (int r = 0; r < m; ++r) {
        const double* g = out->grad.data() + static_cast<std::size_t>(r) * (na + nb);
        if (a->requires_grad)
          for (int c = 0; c < na; ++c) a->grad[static_cast<std::size_t>(r) * na + c] += g[c];
        if (b->requires_grad)
          for (int c = 0; c < nb; ++c) b->grad[static_cast<std::size_t>(r) * nb + c] += g[na + c];
      }
    });
  }
  return out;
}

TensorPtr nll_rows(Tape& tape, const TensorPtr& logits, const std::vector<int>& labels) {
  require_2d(logits, "nll_rows");
  const int m = logits->shape[0], n = logits->shape[1];
  if (static_cast<int>(labels.size()) != m) throw ShapeError("nll_rows: one label per row required");
  for (int l : labels)
    if (l < 0 || l >= n) throw std::invalid_argument("nll_rows: label out of range");
  auto out = make_output({1}, track(tape, {&logits}));
  double total = 0.0;
  for (int r = 0; r < m; ++r) {
    const double* x = logits->values.data() + static_cast<std::size_t>(r) * n;
    double mx = x[0];
    for (int c = 1; c < n; ++c) mx = std::max(mx, x[c]);
    double s = 0.0;
    for (int c = 0; c < n; ++c) s += std::exp(x[c] - mx);
    total += mx + std::log(s) - x[labels[r]];
  }
  out->values[0] = total;
  check_finite(*out, "nll_rows");
  if (out->requires_grad) {
    tape.record([logits, out, labels, m, n] {
      if (!logits->requires_grad) return;
      const double g = out->grad[0];
      for (int r = 0; r < m; ++r) {
        const double* x = logits->values.data() + static_cast<std::size_t>(r) * n;
        double* dx = logits->grad.data() + static_cast<std::size_t>(r) * n;
        double mx = x[0];
        for (int c = 1; c < n; ++c) mx = std::max(mx, x[c]);
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += std::exp(x[c] - mx);
        for (int c = 0; c < n; ++c) {
          double p = std::exp(x[c] - mx) / s;
          dx[c] += g * (p - (c == labels[r] ? 1.0 : 0.0));
        }
      }
    });
  }
  return out;
}

}  // namespace e3p::ops

// Copyright 2026 The Progen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>

#include "util/error.hpp"

namespace progen {
namespace {

using ImplPtr = std::shared_ptr<detail::TensorImpl>;

Tape* recording_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = Tape::current();
  if (!tape) return nullptr;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return tape;
  }
  return nullptr;
}

bool live(const ImplPtr& t) { return t->requires_grad && !t->grad.empty(); }

void check_finite(const Tensor& out, const char* op) {
  if (!numeric_checks_enabled()) return;
  for (double v : out.data()) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

Tensor finish(const char* op, Shape shape, std::vector<double> data) {
  Tensor out(std::move(shape), std::move(data));
  check_finite(out, op);
  return out;
}

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_str(x.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

// out[r x c] += a[r x k] * b[k x c]
void gemm_nn(const double* a, const double* b, double* out, std::size_t r, std::size_t k,
             std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) {
    double* orow = out + i * c;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * c;
      for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
    }
  }
}

std::vector<double> transposed(const double* a, std::size_t r, std::size_t c) {
  std::vector<double> t(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) t[j * r + i] = a[i * c + j];
  return t;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t r = a.rows(), k = a.cols(), c = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  std::vector<double> out(r * c, 0.0);
  gemm_nn(a.data().data(), b.data().data(), out.data(), r, k, c);
  Tensor result = finish("matmul", {r, c}, std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    ImplPtr ai = a.handle(), bi = b.handle(), oi = result.handle();
    const Tensor inputs[] = {a, b};
    tape->record("matmul", inputs, result, [ai, bi, oi, r, k, c] {
      if (live(ai)) {
        // dA = dC * B^T
        std::vector<double> bt = transposed(bi->data.data(), k, c);
        gemm_nn(oi->grad.data(), bt.data(), ai->grad.data(), r, c, k);
      }
      if (live(bi)) {
        // dB = A^T * dC
        std::vector<double> at = transposed(ai->data.data(), r, k);
        gemm_nn(at.data(), oi->grad.data(), bi->grad.data(), k, r, c);
      }
    });
  }
  return result;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t r = a.rows(), c = a.cols();
  Tensor result = finish("transpose", {c, r}, transposed(a.data().data(), r, c));
  if (Tape* tape = recording_tape({&a})) {
    ImplPtr ai = a.handle(), oi = result.handle();
    const Tensor inputs[] = {a};
    tape->record("transpose", inputs, result, [ai, oi, r, c] {
      if (!live(ai)) return;
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) ai->grad[i * c + j] += oi->grad[j * r + i];
    });
  }
  return result;
}

namespace {

template <typename Fwd, typename GradA, typename GradB>
Tensor binary_elementwise(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, GradA ga,
                          GradB gb) {
  require_same_shape(a, b, op);
  const std::size_t n = a.numel();
  std::vector<double> out(n);
  auto ad = a.data(), bd = b.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(ad[i], bd[i]);
  Tensor result = finish(op, a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    ImplPtr ai = a.handle(), bi = b.handle(), oi = result.handle();
    const Tensor inputs[] = {a, b};
    tape->record(op, inputs, result, [ai, bi, oi, n, ga, gb] {
      if (live(ai))
        for (std::size_t i = 0; i < n; ++i)
          ai->grad[i] += ga(oi->grad[i], ai->data[i], bi->data[i]);
      if (live(bi))
        for (std::size_t i = 0; i < n; ++i)
          bi->grad[i] += gb(oi->grad[i], ai->data[i], bi->data[i]);
    });
  }
  return result;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double g, double, double) { return g; }, [](double g, double, double) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double g, double, double) { return g; }, [](double g, double, double) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double g, double, double y) { return g * y; },
      [](double g, double x, double) { return g * x; });
}

Tensor scale(const Tensor& x, double factor) {
  const std::size_t n = x.numel();
  std::vector<double> out(n);
  auto xd = x.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = xd[i] * factor;
  Tensor result = finish("scale", x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("scale", inputs, result, [xi, oi, n, factor] {
      if (!live(xi)) return;
      for (std::size_t i = 0; i < n; ++i) xi->grad[i] += oi->grad[i] * factor;
    });
  }
  return result;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_rank(x, 2, "add_bias");
  const std::size_t r = x.rows(), c = x.cols();
  if (bias.numel() != c) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not match " +
                         shape_str(x.shape()));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  auto bd = bias.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bd[j];
  Tensor result = finish("add_bias", x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x, &bias})) {
    ImplPtr xi = x.handle(), bi = bias.handle(), oi = result.handle();
    const Tensor inputs[] = {x, bias};
    tape->record("add_bias", inputs, result, [xi, bi, oi, r, c] {
      if (live(xi))
        for (std::size_t i = 0; i < r * c; ++i) xi->grad[i] += oi->grad[i];
      if (live(bi))
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) bi->grad[j] += oi->grad[i * c + j];
    });
  }
  return result;
}

Tensor relu(const Tensor& x) {
  const std::size_t n = x.numel();
  std::vector<double> out(n);
  auto xd = x.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = xd[i] > 0.0 ? xd[i] : 0.0;
  Tensor result = finish("relu", x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("relu", inputs, result, [xi, oi, n] {
      if (!live(xi)) return;
      for (std::size_t i = 0; i < n; ++i)
        if (xi->data[i] > 0.0) xi->grad[i] += oi->grad[i];
    });
  }
  return result;
}

Tensor sigmoid(const Tensor& x) {
  const std::size_t n = x.numel();
  std::vector<double> out(n);
  auto xd = x.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = xd[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  Tensor result = finish("sigmoid", x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("sigmoid", inputs, result, [xi, oi, n] {
      if (!live(xi)) return;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = oi->data[i];
        xi->grad[i] += oi->grad[i] * s * (1.0 - s);
      }
    });
  }
  return result;
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const Shape& shape = x.shape();
  if (axis >= shape.size()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                         shape_str(shape));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t extent = shape[axis];
  std::vector<double> out(x.numel());
  auto xd = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * extent * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < extent; ++k) mx = std::max(mx, xd[base + k * inner]);
      double total = 0.0;
      for (std::size_t k = 0; k < extent; ++k) {
        const double e = std::exp(xd[base + k * inner] - mx);
        out[base + k * inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < extent; ++k) out[base + k * inner] /= total;
    }
  }
  Tensor result = finish("softmax", shape, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("softmax", inputs, result, [xi, oi, outer, inner, extent] {
      if (!live(xi)) return;
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
          const std::size_t base = o * extent * inner + in;
          double dot = 0.0;
          for (std::size_t k = 0; k < extent; ++k) {
            const std::size_t idx = base + k * inner;
            dot += oi->grad[idx] * oi->data[idx];
          }
          for (std::size_t k = 0; k < extent; ++k) {
            const std::size_t idx = base + k * inner;
            xi->grad[idx] += oi->data[idx] * (oi->grad[idx] - dot);
          }
        }
      }
    });
  }
  return result;
}

Tensor masked_softmax(const Tensor& x, std::span<const std::uint8_t> allowed) {
  require_rank(x, 2, "masked_softmax");
  const std::size_t r = x.rows(), c = x.cols();
  if (allowed.size() != r * c) {
    throw DimensionError("masked_softmax: mask has " + std::to_string(allowed.size()) +
                         " entries for scores " + shape_str(x.shape()));
  }
  std::vector<double> out(r * c, 0.0);
  auto xd = x.data();
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t base = i * c;
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < c; ++j) {
      if (allowed[base + j]) {
        mx = std::max(mx, xd[base + j]);
        any = true;
      }
    }
    if (!any) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!allowed[base + j]) continue;
      const double e = std::exp(xd[base + j] - mx);
      out[base + j] = e;
      total += e;
    }
    for (std::size_t j = 0; j < c; ++j) out[base + j] /= total;
  }
  Tensor result = finish("masked_softmax", x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("masked_softmax", inputs, result, [xi, oi, r, c] {
      if (!live(xi)) return;
      for (std::size_t i = 0; i < r; ++i) {
        const std::size_t base = i * c;
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) dot += oi->grad[base + j] * oi->data[base + j];
        for (std::size_t j = 0; j < c; ++j)
          xi->grad[base + j] += oi->data[base + j] * (oi->grad[base + j] - dot);
      }
    });
  }
  return result;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  require_rank(x, 2, "layer_norm");
  const std::size_t r = x.rows(), c = x.cols();
  if (gain.numel() != c || bias.numel() != c) {
    throw DimensionError("layer_norm: gain " + shape_str(gain.shape()) + " / bias " +
                         shape_str(bias.shape()) + " do not match " + shape_str(x.shape()));
  }
  std::vector<double> xhat(r * c), inv_std(r), out(r * c);
  auto xd = x.data(), gd = gain.data(), bd = bias.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = xd.data() + i * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += row[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat[i * c + j] = (row[j] - mu) * inv_std[i];
      out[i * c + j] = gd[j] * xhat[i * c + j] + bd[j];
    }
  }
  Tensor result = finish("layer_norm", x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x, &gain, &bias})) {
    ImplPtr xi = x.handle(), gi = gain.handle(), bi = bias.handle(), oi = result.handle();
    const Tensor inputs[] = {x, gain, bias};
    tape->record("layer_norm", inputs, result,
                 [xi, gi, bi, oi, r, c, xhat = std::move(xhat), inv_std = std::move(inv_std)] {
                   const double n = static_cast<double>(c);
                   for (std::size_t i = 0; i < r; ++i) {
                     const std::size_t base = i * c;
                     if (live(gi))
                       for (std::size_t j = 0; j < c; ++j)
                         gi->grad[j] += oi->grad[base + j] * xhat[base + j];
                     if (live(bi))
                       for (std::size_t j = 0; j < c; ++j) bi->grad[j] += oi->grad[base + j];
                     if (!live(xi)) continue;
                     double sum_d = 0.0, sum_dx = 0.0;
                     for (std::size_t j = 0; j < c; ++j) {
                       const double d = oi->grad[base + j] * gi->data[j];
                       sum_d += d;
                       sum_dx += d * xhat[base + j];
                     }
                     for (std::size_t j = 0; j < c; ++j) {
                       const double d = oi->grad[base + j] * gi->data[j];
                       xi->grad[base + j] +=
                           inv_std[i] / n * (n * d - sum_d - xhat[base + j] * sum_dx);
                     }
                   }
                 });
  }
  return result;
}

Tensor cross_entropy(const Tensor& logits, std::span<const TokenId> targets, TokenId pad_id) {
  require_rank(logits, 2, "cross_entropy");
  const std::size_t t = logits.rows(), v = logits.cols();
  if (targets.size() != t) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) +
                         " targets for logits " + shape_str(logits.shape()));
  }
  std::size_t count = 0;
  for (TokenId id : targets) {
    if (id == pad_id) continue;
    if (id < 0 || static_cast<std::size_t>(id) >= v) {
      throw IndexError("cross_entropy: target id " + std::to_string(id) +
                       " out of range for vocabulary of " + std::to_string(v));
    }
    ++count;
  }
  if (count == 0) throw ContractError("cross_entropy: every target is padding");
  auto ld = logits.data();
  std::vector<double> probs(t * v, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    if (targets[i] == pad_id) continue;
    const double* row = ld.data() + i * v;
    double mx = row[0];
    for (std::size_t j = 1; j < v; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      probs[i * v + j] = std::exp(row[j] - mx);
      z += probs[i * v + j];
    }
    for (std::size_t j = 0; j < v; ++j) probs[i * v + j] /= z;
    total += (mx + std::log(z)) - row[targets[i]];
  }
  Tensor result = finish("cross_entropy", {1}, {total / static_cast<double>(count)});
  if (Tape* tape = recording_tape({&logits})) {
    ImplPtr li = logits.handle(), oi = result.handle();
    std::vector<TokenId> tgt(targets.begin(), targets.end());
    const Tensor inputs[] = {logits};
    tape->record("cross_entropy", inputs, result,
                 [li, oi, t, v, count, pad_id, tgt = std::move(tgt), probs = std::move(probs)] {
                   if (!live(li)) return;
                   const double g = oi->grad[0] / static_cast<double>(count);
                   for (std::size_t i = 0; i < t; ++i) {
                     if (tgt[i] == pad_id) continue;
                     for (std::size_t j = 0; j < v; ++j) li->grad[i * v + j] += g * probs[i * v + j];
                     li->grad[i * v + static_cast<std::size_t>(tgt[i])] -= g;
                   }
                 });
  }
  return result;
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor result = finish("sum", {1}, {total});
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("sum", inputs, result, [xi, oi] {
      if (!live(xi)) return;
      for (double& g : xi->grad) g += oi->grad[0];
    });
  }
  return result;
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                         shape_str(shape));
  }
  Tensor result = finish("reshape", std::move(shape),
                         std::vector<double>(x.data().begin(), x.data().end()));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("reshape", inputs, result, [xi, oi] {
      if (!live(xi)) return;
      for (std::size_t i = 0; i < xi->grad.size(); ++i) xi->grad[i] += oi->grad[i];
    });
  }
  return result;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  require_rank(x, 2, "slice_rows");
  const std::size_t c = x.cols();
  if (count == 0 || begin + count > x.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + shape_str(x.shape()));
  }
  auto xd = x.data();
  std::vector<double> out(xd.begin() + begin * c, xd.begin() + (begin + count) * c);
  Tensor result = finish("slice_rows", {count, c}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("slice_rows", inputs, result, [xi, oi, begin, c] {
      if (!live(xi)) return;
      for (std::size_t i = 0; i < oi->grad.size(); ++i) xi->grad[begin * c + i] += oi->grad[i];
    });
  }
  return result;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  require_rank(x, 2, "slice_cols");
  const std::size_t r = x.rows(), c = x.cols();
  if (count == 0 || begin + count > c) {
    throw DimensionError("slice_cols: cols [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + shape_str(x.shape()));
  }
  auto xd = x.data();
  std::vector<double> out(r * count);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = xd[i * c + begin + j];
  Tensor result = finish("slice_cols", {r, count}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("slice_cols", inputs, result, [xi, oi, r, c, begin, count] {
      if (!live(xi)) return;
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < count; ++j)
          xi->grad[i * c + begin + j] += oi->grad[i * count + j];
    });
  }
  return result;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  const std::size_t c = parts[0].cols();
  std::size_t rows = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    if (p.cols() != c) {
      throw DimensionError("concat_rows: width mismatch " + shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    rows += p.rows();
    any_grad = any_grad || p.requires_grad();
  }
  std::vector<double> out;
  out.reserve(rows * c);
  for (const Tensor& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  Tensor result = finish("concat_rows", {rows, c}, std::move(out));
  Tape* tape = Tape::current();
  if (tape && any_grad) {
    std::vector<ImplPtr> impls;
    for (const Tensor& p : parts) impls.push_back(p.handle());
    ImplPtr oi = result.handle();
    tape->record("concat_rows", parts, result, [impls, oi] {
      std::size_t offset = 0;
      for (const auto& p : impls) {
        const std::size_t n = p->data.size();
        if (live(p))
          for (std::size_t i = 0; i < n; ++i) p->grad[i] += oi->grad[offset + i];
        offset += n;
      }
    });
  }
  return result;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const std::size_t r = parts[0].rows();
  std::size_t cols = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    if (p.rows() != r) {
      throw DimensionError("concat_cols: height mismatch " + shape_str(parts[0].shape()) +
                           " vs " + shape_str(p.shape()));
    }
    cols += p.cols();
    any_grad = any_grad || p.requires_grad();
  }
  std::vector<double> out(r * cols);
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t pc = p.cols();
    auto pd = p.data();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < pc; ++j) out[i * cols + offset + j] = pd[i * pc + j];
    offset += pc;
  }
  Tensor result = finish("concat_cols", {r, cols}, std::move(out));
  Tape* tape = Tape::current();
  if (tape && any_grad) {
    std::vector<ImplPtr> impls;
    for (const Tensor& p : parts) impls.push_back(p.handle());
    ImplPtr oi = result.handle();
    tape->record("concat_cols", parts, result, [impls, oi, r, cols] {
      std::size_t off = 0;
      for (const auto& p : impls) {
        const std::size_t pc = p->shape[1];
        if (live(p))
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < pc; ++j) p->grad[i * pc + j] += oi->grad[i * cols + off + j];
        off += pc;
      }
    });
  }
  return result;
}

Tensor embedding(const Tensor& table, std::span<const TokenId> ids) {
  require_rank(table, 2, "embedding");
  const std::size_t v = table.rows(), d = table.cols();
  if (ids.empty()) throw DimensionError("embedding: empty id sequence");
  auto td = table.data();
  std::vector<double> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= v) {
      throw IndexError("embedding: id " + std::to_string(ids[i]) + " out of range for table of " +
                       std::to_string(v) + " rows");
    }
    std::copy_n(td.begin() + static_cast<std::size_t>(ids[i]) * d, d, out.begin() + i * d);
  }
  Tensor result = finish("embedding", {ids.size(), d}, std::move(out));
  if (Tape* tape = recording_tape({&table})) {
    ImplPtr ti = table.handle(), oi = result.handle();
    std::vector<TokenId> saved(ids.begin(), ids.end());
    const Tensor inputs[] = {table};
    tape->record("embedding", inputs, result, [ti, oi, d, saved = std::move(saved)] {
      if (!live(ti)) return;
      for (std::size_t i = 0; i < saved.size(); ++i) {
        const std::size_t row = static_cast<std::size_t>(saved[i]);
        for (std::size_t j = 0; j < d; ++j) ti->grad[row * d + j] += oi->grad[i * d + j];
      }
    });
  }
  return result;
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(x, 3, "conv2d");
  require_rank(weight, 4, "conv2d");
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != cin || weight.dim(3) != k || k % 2 == 0) {
    throw DimensionError("conv2d: kernel " + shape_str(weight.shape()) + " incompatible with input " +
                         shape_str(x.shape()));
  }
  if (bias.numel() != cout) {
    throw DimensionError("conv2d: bias " + shape_str(bias.shape()) + " does not match " +
                         std::to_string(cout) + " output channels");
  }
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
  const auto H = static_cast<std::ptrdiff_t>(h), W = static_cast<std::ptrdiff_t>(w);
  auto xd = x.data(), wd = weight.data(), bd = bias.data();
  std::vector<double> out(cout * h * w);
  // Visits each (output pixel, input tap) pair in a fixed order.
  auto for_each_tap = [=](auto&& fn) {
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t ci = 0; ci < cin; ++ci)
        for (std::size_t ky = 0; ky < k; ++ky)
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::size_t widx = ((co * cin + ci) * k + ky) * k + kx;
            const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
            const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
            for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, -dy);
                 y < std::min<std::ptrdiff_t>(H, H - dy); ++y) {
              const std::size_t orow = (co * h + static_cast<std::size_t>(y)) * w;
              const std::size_t irow = (ci * h + static_cast<std::size_t>(y + dy)) * w;
              const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx);
              const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(W, W - dx);
              fn(widx, orow, irow, x0, x1, dx);
            }
          }
  };
  for (std::size_t co = 0; co < cout; ++co)
    std::fill_n(out.begin() + co * h * w, h * w, bd[co]);
  for_each_tap([&](std::size_t widx, std::size_t orow, std::size_t irow, std::ptrdiff_t x0,
                   std::ptrdiff_t x1, std::ptrdiff_t dx) {
    const double wv = wd[widx];
    for (std::ptrdiff_t xx = x0; xx < x1; ++xx)
      out[orow + static_cast<std::size_t>(xx)] += wv * xd[irow + static_cast<std::size_t>(xx + dx)];
  });
  Tensor result = finish("conv2d", {cout, h, w}, std::move(out));
  if (Tape* tape = recording_tape({&x, &weight, &bias})) {
    ImplPtr xi = x.handle(), wi = weight.handle(), bi = bias.handle(), oi = result.handle();
    const Tensor inputs[] = {x, weight, bias};
    tape->record("conv2d", inputs, result, [xi, wi, bi, oi, cout, h, w, for_each_tap] {
      const auto& g = oi->grad;
      if (live(bi))
        for (std::size_t co = 0; co < cout; ++co)
          for (std::size_t i = 0; i < h * w; ++i) bi->grad[co] += g[co * h * w + i];
      const bool gx = live(xi), gw = live(wi);
      if (!gx && !gw) return;
      for_each_tap([&](std::size_t widx, std::size_t orow, std::size_t irow, std::ptrdiff_t x0,
                       std::ptrdiff_t x1, std::ptrdiff_t dx) {
        double acc = 0.0;
        const double wv = wi->data[widx];
        for (std::ptrdiff_t xx = x0; xx < x1; ++xx) {
          const std::size_t o = orow + static_cast<std::size_t>(xx);
          const std::size_t in = irow + static_cast<std::size_t>(xx + dx);
          acc += g[o] * xi->data[in];
          if (gx) xi->grad[in] += g[o] * wv;
        }
        if (gw) wi->grad[widx] += acc;
      });
    });
  }
  return result;
}

Tensor max_pool2d(const Tensor& x, std::size_t k) {
  require_rank(x, 3, "max_pool2d");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (k == 0 || h % k != 0 || w % k != 0) {
    throw DimensionError("max_pool2d: window " + std::to_string(k) + " does not tile " +
                         shape_str(x.shape()));
  }
  const std::size_t oh = h / k, ow = w / k;
  auto xd = x.data();
  std::vector<double> out(c * oh * ow);
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (ch * h + oy * k) * w + ox * k;
        for (std::size_t dy = 0; dy < k; ++dy)
          for (std::size_t dx = 0; dx < k; ++dx) {
            const std::size_t idx = (ch * h + oy * k + dy) * w + ox * k + dx;
            if (xd[idx] > xd[best]) best = idx;
          }
        const std::size_t o = (ch * oh + oy) * ow + ox;
        out[o] = xd[best];
        argmax[o] = best;
      }
  Tensor result = finish("max_pool2d", {c, oh, ow}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("max_pool2d", inputs, result, [xi, oi, argmax = std::move(argmax)] {
      if (!live(xi)) return;
      for (std::size_t o = 0; o < argmax.size(); ++o) xi->grad[argmax[o]] += oi->grad[o];
    });
  }
  return result;
}

Tensor patchify(const Tensor& x, std::size_t q) {
  require_rank(x, 3, "patchify");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (q == 0 || h % q != 0 || w % q != 0) {
    throw DimensionError("patchify: cell " + std::to_string(q) + " does not tile " +
                         shape_str(x.shape()));
  }
  const std::size_t gh = h / q, gw = w / q, width = c * q * q;
  // index[o] = source offset of output element o
  std::vector<std::size_t> index(gh * gw * width);
  for (std::size_t py = 0; py < gh; ++py)
    for (std::size_t px = 0; px < gw; ++px)
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t dy = 0; dy < q; ++dy)
          for (std::size_t dx = 0; dx < q; ++dx) {
            const std::size_t o = (py * gw + px) * width + (ch * q + dy) * q + dx;
            index[o] = (ch * h + py * q + dy) * w + px * q + dx;
          }
  auto xd = x.data();
  std::vector<double> out(index.size());
  for (std::size_t o = 0; o < index.size(); ++o) out[o] = xd[index[o]];
  Tensor result = finish("patchify", {gh * gw, width}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("patchify", inputs, result, [xi, oi, index = std::move(index)] {
      if (!live(xi)) return;
      for (std::size_t o = 0; o < index.size(); ++o) xi->grad[index[o]] += oi->grad[o];
    });
  }
  return result;
}

Tensor dropout(const Tensor& x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ContractError("dropout rate must lie in [0, 1)");
  if (rate == 0.0) return x;
  const std::size_t n = x.numel();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(n);
  for (std::size_t i = 0; i < n; ++i) mask[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
  std::vector<double> out(n);
  auto xd = x.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = xd[i] * mask[i];
  Tensor result = finish("dropout", x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    ImplPtr xi = x.handle(), oi = result.handle();
    const Tensor inputs[] = {x};
    tape->record("dropout", inputs, result, [xi, oi, mask = std::move(mask)] {
      if (!live(xi)) return;
      for (std::size_t i = 0; i < mask.size(); ++i) xi->grad[i] += oi->grad[i] * mask[i];
    });
  }
  return result;
}

}  // namespace progen

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

#ifndef PROGEN_TENSOR_TENSOR_HPP_
#define PROGEN_TENSOR_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace progen {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty when no gradient is held
  bool requires_grad = false;
  Tape* tape = nullptr;      // tape that recorded this tensor as an output
  std::ptrdiff_t node = -1;  // index of the producing node on that tape
};

}  // namespace detail

// Dense row-major array of doubles. Copies share storage; values are treated
// as immutable once a tensor has been consumed by an op, except for the
// gradient buffer and optimizer updates of leaf parameters.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }

  const Shape& shape() const { return impl().shape; }
  std::size_t rank() const { return impl().shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return impl().data.size(); }
  // Row/column extents of a rank-2 tensor.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return impl().data; }
  // Writable storage; only meant for leaf tensors (initialisation, optimizer).
  std::span<double> mutable_data() { return impl().data; }
  double operator[](std::size_t i) const { return impl().data[i]; }
  double at(std::size_t row, std::size_t col) const;
  double item() const;

  bool requires_grad() const { return impl().requires_grad; }
  Tensor& set_requires_grad(bool value);

  bool has_grad() const { return !impl().grad.empty(); }
  std::span<const double> grad() const { return impl().grad; }
  std::span<double> mutable_grad() { return impl().grad; }
  // Allocates (if needed) and zeroes the gradient buffer.
  void zero_grad();
  void clear_grad() { impl().grad.clear(); }

  // Same values, no gradient tracking, no tape participation.
  Tensor detach() const;
  // Deep copy of the values into fresh storage.
  Tensor clone() const;

  std::optional<std::size_t> node_id() const;
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

  const std::shared_ptr<detail::TensorImpl>& handle() const { return impl_; }

 private:
  detail::TensorImpl& impl() const;
  std::shared_ptr<detail::TensorImpl> impl_;
};

// Ordered record of differentiable operations. Nodes are appended in
// execution order, so insertion order is a topological order. Ops record
// onto the tape installed on the current thread by a TapeScope, and only
// when at least one input requires a gradient.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  Tape() = default;
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return nodes_.size(); }
  std::string_view op_name(std::size_t node) const { return nodes_.at(node).op; }
  const std::vector<std::size_t>& inputs_of(std::size_t node) const;

  // Writes d(loss)/d(t) into the gradient buffer of every tensor that takes
  // part in computing `loss` and requires a gradient. Buffers are reset first,
  // so running backward twice over the same tape yields identical gradients.
  void backward(const Tensor& loss);

  // Appends a node; used by op implementations.
  void record(std::string_view op, std::span<const Tensor> inputs,
              const Tensor& output, BackwardFn backward);

  static Tape* current();

 private:
  friend class TapeScope;
  struct Node {
    std::string_view op;
    std::vector<std::shared_ptr<detail::TensorImpl>> inputs;
    std::vector<std::size_t> input_nodes;  // producing node per input, or npos
    std::shared_ptr<detail::TensorImpl> output;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// Installs a tape as the recording target for the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Suspends recording for the current thread (inference).
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* previous_;
};

// Finite-value checking after every op. Enabled by default.
void set_numeric_checks(bool enabled);
bool numeric_checks_enabled();

}  // namespace progen

#endif  // PROGEN_TENSOR_TENSOR_HPP_

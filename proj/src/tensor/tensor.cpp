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

#include "tensor/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <sstream>

#include "util/error.hpp"

namespace progen {
namespace {

thread_local Tape* g_current_tape = nullptr;
std::atomic<bool> g_numeric_checks{true};
constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one axis");
  for (std::size_t extent : shape) {
    if (extent == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("tensor shape " + shape_str(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  }
  impl_ = std::make_shared<detail::TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> data(shape_numel(shape), 0.0);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> data(shape_numel(shape), value);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data,
                      bool requires_grad) {
  return Tensor({rows, cols}, std::move(data), requires_grad);
}

detail::TensorImpl& Tensor::impl() const {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return *impl_;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_str(shape()));
  }
  return impl().shape[axis];
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("expected a matrix, got shape " + shape_str(shape()));
  return impl().shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("expected a matrix, got shape " + shape_str(shape()));
  return impl().shape[1];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  const std::size_t c = cols();
  if (row >= rows() || col >= c) throw IndexError("matrix index out of range");
  return impl().data[row * c + col];
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ContractError("item() requires a single-element tensor, got " + shape_str(shape()));
  }
  return impl().data[0];
}

Tensor& Tensor::set_requires_grad(bool value) {
  impl().requires_grad = value;
  return *this;
}

void Tensor::zero_grad() {
  auto& self = impl();
  self.grad.assign(self.data.size(), 0.0);
}

Tensor Tensor::detach() const {
  Tensor out;
  out.impl_ = std::make_shared<detail::TensorImpl>();
  out.impl_->shape = impl().shape;
  out.impl_->data = impl().data;
  return out;
}

Tensor Tensor::clone() const { return Tensor(shape(), impl().data, requires_grad()); }

std::optional<std::size_t> Tensor::node_id() const {
  if (impl().node < 0) return std::nullopt;
  return static_cast<std::size_t>(impl().node);
}

// ---------------------------------------------------------------------------

Tape::~Tape() {
  for (auto& node : nodes_) {
    if (node.output && node.output->tape == this) {
      node.output->tape = nullptr;
      node.output->node = -1;
    }
  }
}

const std::vector<std::size_t>& Tape::inputs_of(std::size_t node) const {
  return nodes_.at(node).input_nodes;
}

void Tape::record(std::string_view op, std::span<const Tensor> inputs, const Tensor& output,
                  BackwardFn backward) {
  Node node;
  node.op = op;
  for (const Tensor& input : inputs) {
    const auto& impl = input.handle();
    node.inputs.push_back(impl);
    node.input_nodes.push_back(impl->tape == this && impl->node >= 0
                                   ? static_cast<std::size_t>(impl->node)
                                   : kNoNode);
  }
  node.output = output.handle();
  node.output->requires_grad = true;
  node.output->tape = this;
  node.output->node = static_cast<std::ptrdiff_t>(nodes_.size());
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined()) throw ContractError("backward() on an undefined tensor");
  if (loss.numel() != 1) {
    throw ContractError("backward() requires a scalar loss, got shape " + shape_str(loss.shape()));
  }
  const auto& root = loss.handle();
  if (root->tape != this || root->node < 0) {
    throw ContractError("backward() on a tensor that was not recorded on this tape");
  }
  const auto last = static_cast<std::size_t>(root->node);
  for (std::size_t i = 0; i <= last; ++i) {
    Node& node = nodes_[i];
    for (auto& input : node.inputs) {
      if (input->requires_grad) input->grad.assign(input->data.size(), 0.0);
    }
    node.output->grad.assign(node.output->data.size(), 0.0);
  }
  root->grad[0] = 1.0;
  for (std::size_t i = last + 1; i-- > 0;) nodes_[i].backward();
}

Tape* Tape::current() { return g_current_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_current_tape) { g_current_tape = &tape; }
TapeScope::~TapeScope() { g_current_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_current_tape) { g_current_tape = nullptr; }
NoGradScope::~NoGradScope() { g_current_tape = previous_; }

void set_numeric_checks(bool enabled) { g_numeric_checks.store(enabled); }
bool numeric_checks_enabled() { return g_numeric_checks.load(std::memory_order_relaxed); }

}  // namespace progen

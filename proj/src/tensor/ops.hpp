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

#ifndef PROGEN_TENSOR_OPS_HPP_
#define PROGEN_TENSOR_OPS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "tensor/tensor.hpp"
#include "util/rng.hpp"

namespace progen {

using TokenId = std::int32_t;

// All ops record onto the current tape when an input requires a gradient.
// Shapes are checked eagerly and reported with DimensionError.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
// x[r x c] + bias[c], broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor softmax(const Tensor& x, std::size_t axis);
// Row-wise softmax of a matrix where `allowed` (row-major, same extent as x)
// selects the entries that participate. Disallowed entries get exactly zero
// weight; a fully disallowed row is all zeros.
Tensor masked_softmax(const Tensor& x, std::span<const std::uint8_t> allowed);

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

// Mean over non-pad rows of -log softmax(logits)[target].
Tensor cross_entropy(const Tensor& logits, std::span<const TokenId> targets, TokenId pad_id);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);

// Gathers rows of table[V x d] for each id.
Tensor embedding(const Tensor& table, std::span<const TokenId> ids);

// x[Cin x H x W] convolved with w[Cout x Cin x k x k] (k odd, stride 1,
// zero padding k/2) plus bias[Cout].
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias);
// Non-overlapping k x k max pooling of x[C x H x W].
Tensor max_pool2d(const Tensor& x, std::size_t k);
// Splits x[C x H x W] into q x q cells, one row per cell in row-major cell
// order: result[(H/q)(W/q) x C*q*q].
Tensor patchify(const Tensor& x, std::size_t q);

// Inverted dropout; identity when rate == 0.
Tensor dropout(const Tensor& x, double rate, Rng& rng);

}  // namespace progen

#endif  // PROGEN_TENSOR_OPS_HPP_

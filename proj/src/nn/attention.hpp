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

#ifndef PROGEN_NN_ATTENTION_HPP_
#define PROGEN_NN_ATTENTION_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nn/layers.hpp"

namespace progen::nn {

// Which keys a query may attend to. `key_valid` (empty = all valid) marks
// non-padding source positions; `causal` additionally hides keys after the
// query position. Memory slot columns are never masked.
struct AttentionMask {
  std::vector<std::uint8_t> key_valid;
  bool causal = false;

  // Row-major [queries x (keys + memory)] matrix of allowed entries.
  std::vector<std::uint8_t> allowed(std::size_t queries, std::size_t keys,
                                    std::size_t memory) const;
};

// Projection weights of one multi-head attention block.
struct AttentionWeights {
  std::size_t n_heads = 1;
  Linear query;
  Linear key;
  Linear value;
  Linear output;

  AttentionWeights() = default;
  AttentionWeights(ParameterStore& store, const std::string& name, std::size_t d_model,
                   std::size_t n_heads, Rng& rng);
  std::size_t d_model() const { return query.in_features(); }
};

// Learnable key/value rows appended to every attention call of a layer;
// they do not depend on the input.
struct MemorySlots {
  Tensor keys;    // [m x d_model]
  Tensor values;  // [m x d_model]

  MemorySlots() = default;
  MemorySlots(ParameterStore& store, const std::string& name, std::size_t slots,
              std::size_t d_model, Rng& rng);
  std::size_t size() const { return keys.defined() ? keys.rows() : 0; }
};

struct AttentionOptions {
  double dropout = 0.0;
  // When set, receives the per-head attention weight matrices.
  std::vector<Tensor>* weights_out = nullptr;
};

// softmax(Q K^T / sqrt(d_head) + mask) V per head, heads concatenated and
// projected. `query` is [Tq x d], `source` is [Tk x d].
Tensor multi_head_attention(const AttentionWeights& w, const Tensor& query, const Tensor& source,
                            const AttentionMask& mask, const RunMode& mode,
                            const AttentionOptions& options = {});

// Self-attention over `x` whose key/value sets are extended with the memory
// slots. With zero slots this is exactly multi_head_attention(w, x, x, ...).
Tensor memory_augmented_attention(const AttentionWeights& w, const MemorySlots& slots,
                                  const Tensor& x, const AttentionMask& mask,
                                  const RunMode& mode, const AttentionOptions& options = {});

// Cross-attention of the decoder state against every encoder layer output,
// combined as sum_l alpha_l * C_l / sqrt(L) with
// alpha_l = sigmoid(gate_l([dec_state ; C_l])).
// `gates` holds one [2d -> d] affine map per encoder layer.
Tensor meshed_cross_attention(const AttentionWeights& cross, std::span<const Linear> gates,
                              const Tensor& dec_state, std::span<const Tensor> enc_outputs,
                              const AttentionMask& enc_mask, const RunMode& mode,
                              const AttentionOptions& options = {},
                              std::vector<Tensor>* gates_out = nullptr);

}  // namespace progen::nn

#endif  // PROGEN_NN_ATTENTION_HPP_

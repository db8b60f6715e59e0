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

#ifndef PROGEN_NN_STACK_HPP_
#define PROGEN_NN_STACK_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nn/attention.hpp"
#include "nn/layers.hpp"

namespace progen::nn {

struct TransformerConfig {
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_enc_layers = 2;
  std::size_t n_dec_layers = 2;
  std::size_t d_ff = 128;
  std::size_t memory_slots = 0;  // encoder self-attention memory; 0 = vanilla
  bool mesh = false;             // decoder attends to every encoder layer
  double dropout = 0.1;
  std::size_t max_len = 128;  // positional table size

  // Throws ConfigError on inconsistent values.
  void validate() const;
};

// Post-norm encoder. Every layer uses memory-augmented self-attention (plain
// attention when memory_slots == 0). Positional encodings are added to the
// input before the first layer.
class Encoder {
 public:
  struct Layer {
    AttentionWeights attention;
    MemorySlots memory;
    LayerNorm norm1;
    FeedForward feed_forward;
    LayerNorm norm2;
  };

  Encoder() = default;
  Encoder(ParameterStore& store, const std::string& name, const TransformerConfig& config,
          Rng& rng);

  // `input` is [S x d_model]; `valid` marks non-padding rows (empty = all).
  // Returns the output of every layer, first to last.
  std::vector<Tensor> forward(const Tensor& input, std::span<const std::uint8_t> valid,
                              const RunMode& mode) const;

  Tensor forward_layer(std::size_t index, const Tensor& x, const AttentionMask& mask,
                       const RunMode& mode) const;
  const std::vector<Layer>& layers() const { return layers_; }
  const Tensor& positions() const { return positions_; }

 private:
  TransformerConfig config_;
  std::vector<Layer> layers_;
  Tensor positions_;
};

// Post-norm decoder: masked self-attention, cross-attention (meshed over all
// encoder layers, or against the last one only), feed-forward, then a
// projection onto the vocabulary.
class Decoder {
 public:
  struct Layer {
    AttentionWeights self_attention;
    LayerNorm norm1;
    AttentionWeights cross_attention;
    std::vector<Linear> gates;  // one per encoder layer when meshed
    LayerNorm norm2;
    FeedForward feed_forward;
    LayerNorm norm3;
  };

  Decoder() = default;
  Decoder(ParameterStore& store, const std::string& name, const TransformerConfig& config,
          std::size_t vocab_size, Rng& rng);

  // Logits [T x |V|] for every prefix position, or [1 x |V|] for the last
  // position only when `last_only` is set.
  Tensor forward(std::span<const TokenId> tokens, std::span<const Tensor> enc_outputs,
                 std::span<const std::uint8_t> enc_valid, const RunMode& mode,
                 bool last_only = false) const;

  Tensor embed(std::span<const TokenId> tokens) const;
  Tensor forward_layer(std::size_t index, const Tensor& x, std::span<const Tensor> enc_outputs,
                       const AttentionMask& enc_mask, const RunMode& mode) const;
  Tensor project(const Tensor& hidden) const { return vocab_projection_.forward(hidden); }

  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t vocab_size() const { return vocab_size_; }
  const TransformerConfig& config() const { return config_; }

 private:
  TransformerConfig config_;
  std::size_t vocab_size_ = 0;
  Tensor token_embedding_;
  std::vector<Layer> layers_;
  Linear vocab_projection_;
  Tensor positions_;
};

}  // namespace progen::nn

#endif  // PROGEN_NN_STACK_HPP_

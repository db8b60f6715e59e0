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

#include "nn/stack.hpp"

#include <cmath>

#include "util/error.hpp"

namespace progen::nn {

void TransformerConfig::validate() const {
  if (d_model == 0 || n_heads == 0 || n_enc_layers == 0 || n_dec_layers == 0 || d_ff == 0 ||
      max_len == 0) {
    throw ConfigError("transformer sizes must all be positive");
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " +
                      std::to_string(n_heads));
  }
  if (d_model % 2 != 0) throw ConfigError("d_model must be even for positional encodings");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
}

Encoder::Encoder(ParameterStore& store, const std::string& name, const TransformerConfig& config,
                 Rng& rng)
    : config_(config) {
  config_.validate();
  for (std::size_t i = 0; i < config.n_enc_layers; ++i) {
    const std::string prefix = name + ".layer" + std::to_string(i);
    Layer layer;
    layer.attention = AttentionWeights(store, prefix + ".self_attention", config.d_model,
                                       config.n_heads, rng);
    layer.memory = MemorySlots(store, prefix + ".self_attention", config.memory_slots,
                               config.d_model, rng);
    layer.norm1 = LayerNorm(store, prefix + ".norm1", config.d_model);
    layer.feed_forward = FeedForward(store, prefix + ".feed_forward", config.d_model, config.d_ff, rng);
    layer.norm2 = LayerNorm(store, prefix + ".norm2", config.d_model);
    layers_.push_back(std::move(layer));
  }
  positions_ = positional_encoding(config.max_len, config.d_model);
}

Tensor Encoder::forward_layer(std::size_t index, const Tensor& x, const AttentionMask& mask,
                              const RunMode& mode) const {
  const Layer& layer = layers_.at(index);
  AttentionOptions options{config_.dropout};
  Tensor attended = memory_augmented_attention(layer.attention, layer.memory, x, mask, mode, options);
  Tensor h = layer.norm1.forward(add(x, apply_dropout(attended, config_.dropout, mode)));
  Tensor ff = layer.feed_forward.forward(h, config_.dropout, mode);
  return layer.norm2.forward(add(h, apply_dropout(ff, config_.dropout, mode)));
}

std::vector<Tensor> Encoder::forward(const Tensor& input, std::span<const std::uint8_t> valid,
                                     const RunMode& mode) const {
  if (input.cols() != config_.d_model) {
    throw DimensionError("encoder input " + shape_str(input.shape()) + " does not match width " +
                         std::to_string(config_.d_model));
  }
  const std::size_t len = input.rows();
  if (len > config_.max_len) {
    throw DataError("encoder input of length " + std::to_string(len) + " exceeds max_len " +
                    std::to_string(config_.max_len));
  }
  AttentionMask mask;
  mask.key_valid.assign(valid.begin(), valid.end());
  Tensor x = apply_dropout(add(input, slice_rows(positions_, 0, len)), config_.dropout, mode);
  std::vector<Tensor> outputs;
  outputs.reserve(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = forward_layer(i, x, mask, mode);
    outputs.push_back(x);
  }
  return outputs;
}

Decoder::Decoder(ParameterStore& store, const std::string& name, const TransformerConfig& config,
                 std::size_t vocab_size, Rng& rng)
    : config_(config), vocab_size_(vocab_size) {
  config_.validate();
  if (vocab_size == 0) throw ConfigError("decoder vocabulary is empty");
  const double std = 1.0 / std::sqrt(static_cast<double>(config.d_model));
  std::vector<double> table(vocab_size * config.d_model);
  for (double& v : table) v = rng.normal(0.0, std);
  token_embedding_ = store.add(name + ".token_embedding",
                               Tensor::matrix(vocab_size, config.d_model, std::move(table)));
  for (std::size_t i = 0; i < config.n_dec_layers; ++i) {
    const std::string prefix = name + ".layer" + std::to_string(i);
    Layer layer;
    layer.self_attention = AttentionWeights(store, prefix + ".self_attention", config.d_model,
                                            config.n_heads, rng);
    layer.norm1 = LayerNorm(store, prefix + ".norm1", config.d_model);
    layer.cross_attention = AttentionWeights(store, prefix + ".cross_attention", config.d_model,
                                             config.n_heads, rng);
    if (config.mesh) {
      for (std::size_t l = 0; l < config.n_enc_layers; ++l) {
        layer.gates.emplace_back(store, prefix + ".gate" + std::to_string(l), 2 * config.d_model,
                                 config.d_model, rng);
      }
    }
    layer.norm2 = LayerNorm(store, prefix + ".norm2", config.d_model);
    layer.feed_forward = FeedForward(store, prefix + ".feed_forward", config.d_model, config.d_ff, rng);
    layer.norm3 = LayerNorm(store, prefix + ".norm3", config.d_model);
    layers_.push_back(std::move(layer));
  }
  vocab_projection_ = Linear(store, name + ".vocab_projection", config.d_model, vocab_size, rng,
                             kOtherGroup, Init::kSmallNormal);
  positions_ = positional_encoding(config.max_len, config.d_model);
}

Tensor Decoder::embed(std::span<const TokenId> tokens) const {
  if (tokens.empty()) throw DataError("decoder input is empty");
  if (tokens.size() > config_.max_len) {
    throw DataError("decoder input of length " + std::to_string(tokens.size()) +
                    " exceeds max_len " + std::to_string(config_.max_len));
  }
  for (TokenId id : tokens) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size_) {
      throw DataError("token id " + std::to_string(id) + " is outside the vocabulary of " +
                      std::to_string(vocab_size_));
    }
  }
  Tensor emb = scale(embedding(token_embedding_, tokens),
                     std::sqrt(static_cast<double>(config_.d_model)));
  return add(emb, slice_rows(positions_, 0, tokens.size()));
}

Tensor Decoder::forward_layer(std::size_t index, const Tensor& x,
                              std::span<const Tensor> enc_outputs, const AttentionMask& enc_mask,
                              const RunMode& mode) const {
  const Layer& layer = layers_.at(index);
  const double p = config_.dropout;
  AttentionOptions options{p};
  AttentionMask causal;
  causal.causal = true;
  Tensor self = multi_head_attention(layer.self_attention, x, x, causal, mode, options);
  Tensor h = layer.norm1.forward(add(x, apply_dropout(self, p, mode)));
  Tensor cross;
  if (config_.mesh) {
    cross = meshed_cross_attention(layer.cross_attention, layer.gates, h, enc_outputs, enc_mask,
                                   mode, options);
  } else {
    cross = multi_head_attention(layer.cross_attention, h, enc_outputs.back(), enc_mask, mode,
                                 options);
  }
  h = layer.norm2.forward(add(h, apply_dropout(cross, p, mode)));
  Tensor ff = layer.feed_forward.forward(h, p, mode);
  return layer.norm3.forward(add(h, apply_dropout(ff, p, mode)));
}

Tensor Decoder::forward(std::span<const TokenId> tokens, std::span<const Tensor> enc_outputs,
                        std::span<const std::uint8_t> enc_valid, const RunMode& mode,
                        bool last_only) const {
  if (enc_outputs.empty()) throw ContractError("decoder needs encoder outputs");
  if (config_.mesh && enc_outputs.size() != config_.n_enc_layers) {
    throw ContractError("meshed decoder expects " + std::to_string(config_.n_enc_layers) +
                        " encoder layers, got " + std::to_string(enc_outputs.size()));
  }
  AttentionMask enc_mask;
  enc_mask.key_valid.assign(enc_valid.begin(), enc_valid.end());
  Tensor x = apply_dropout(embed(tokens), config_.dropout, mode);
  for (std::size_t i = 0; i < layers_.size(); ++i) x = forward_layer(i, x, enc_outputs, enc_mask, mode);
  if (last_only) x = slice_rows(x, x.rows() - 1, 1);
  return project(x);
}

}  // namespace progen::nn

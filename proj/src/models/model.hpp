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

#ifndef PROGEN_MODELS_MODEL_HPP_
#define PROGEN_MODELS_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "decoding/decoding.hpp"
#include "json.hpp"
#include "nn/stack.hpp"
#include "vision/backbone.hpp"

namespace progen::models {

enum class Kind {
  kVisual,  // images -> tokens (ViLM and the single-stage baseline)
  kText,    // tokens -> tokens (LM)
};

struct ModelConfig {
  Kind kind = Kind::kVisual;
  nn::TransformerConfig transformer;
  vision::BackboneConfig backbone;  // visual models only
  std::size_t max_views = 2;
  std::size_t max_source_len = 60;  // text models only
  std::size_t max_target_len = 60;  // generated tokens, EOS included

  void validate() const;
  // Positional table size covering every sequence this model can see.
  std::size_t required_positions() const;

  nlohmann::json to_json() const;
  // Rejects unknown keys with ConfigError.
  static ModelConfig from_json(const nlohmann::json& j);
};

struct Example {
  std::vector<vision::Image> images;  // visual models
  std::vector<TokenId> source;        // text models
  std::vector<TokenId> target;        // without BOS/EOS
};

// Encoder-decoder over either image patches or source tokens. Parameters
// live in the model's own store, named "<name>.*".
class Model {
 public:
  Model(const ModelConfig& config, std::size_t source_vocab, std::size_t target_vocab,
        std::uint64_t seed, const std::string& name);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  std::vector<Tensor> encode(const Example& ex, const nn::RunMode& mode) const;
  // Rows valid in the encoder output (all ones today; kept for padding).
  std::vector<std::uint8_t> source_mask(const Example& ex) const;

  // Teacher-forced logits [T x |V|] for a prefix starting with BOS.
  Tensor logits(const Example& ex, std::span<const TokenId> prefix, const nn::RunMode& mode) const;
  // Mean token NLL of target + EOS given BOS + target.
  Tensor example_loss(const Example& ex, const nn::RunMode& mode) const;
  // sum_i (n_i / N) * loss_i with n_i the scored tokens of example i.
  Tensor batch_loss(std::span<const Example> batch, const nn::RunMode& mode) const;

  // Next-token log-probs with PAD, BOS and UNK excluded. The encoder runs
  // once per returned function.
  decoding::StepFn step_fn(const Example& ex) const;
  decoding::DecodeResult decode(const Example& ex, decoding::DecodeConfig config) const;

  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }
  const ModelConfig& config() const { return config_; }
  const std::string& name() const { return name_; }
  std::size_t source_vocab() const { return source_vocab_; }
  std::size_t target_vocab() const { return target_vocab_; }
  const nn::Decoder& decoder() const { return decoder_; }

 private:
  ModelConfig config_;
  std::string name_;
  std::size_t source_vocab_;
  std::size_t target_vocab_;
  ParameterStore store_;
  vision::Backbone backbone_;
  nn::Linear input_projection_;
  Tensor source_embedding_;
  nn::Encoder encoder_;
  nn::Decoder decoder_;
};

const char* kind_name(Kind kind);

}  // namespace progen::models

#endif  // PROGEN_MODELS_MODEL_HPP_

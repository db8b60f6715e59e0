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

#include "models/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "data/vocab.hpp"
#include "util/error.hpp"

namespace progen::models {
namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

nn::TransformerConfig transformer_from_json(const nlohmann::json& j) {
  const std::string where = "transformer config";
  reject_unknown(j, {"d_model", "n_heads", "n_enc_layers", "n_dec_layers", "d_ff", "memory_slots", "mesh",
                     "dropout", "max_len"},
                 where);
  nn::TransformerConfig c;
  read(j, "d_model", c.d_model, where);
  read(j, "n_heads", c.n_heads, where);
  read(j, "n_enc_layers", c.n_enc_layers, where);
  read(j, "n_dec_layers", c.n_dec_layers, where);
  read(j, "d_ff", c.d_ff, where);
  read(j, "memory_slots", c.memory_slots, where);
  read(j, "mesh", c.mesh, where);
  read(j, "dropout", c.dropout, where);
  read(j, "max_len", c.max_len, where);
  return c;
}

nlohmann::json transformer_to_json(const nn::TransformerConfig& c) {
  return {{"d_model", c.d_model}, {"n_heads", c.n_heads}, {"n_enc_layers", c.n_enc_layers},
          {"n_dec_layers", c.n_dec_layers}, {"d_ff", c.d_ff}, {"memory_slots", c.memory_slots},
          {"mesh", c.mesh}, {"dropout", c.dropout}, {"max_len", c.max_len}};
}

}  // namespace

const char* kind_name(Kind kind) { return kind == Kind::kVisual ? "visual" : "text"; }

void ModelConfig::validate() const {
  transformer.validate();
  if (max_target_len == 0) throw ConfigError("max_target_len must be positive");
  if (kind == Kind::kVisual) {
    backbone.validate();
    if (max_views == 0 || max_views > vision::kMaxViews) throw ConfigError("max_views must be 1 or 2");
  } else if (max_source_len == 0) {
    throw ConfigError("max_source_len must be positive");
  }
}

std::size_t ModelConfig::required_positions() const {
  const std::size_t source = kind == Kind::kVisual ? backbone.patches_per_view() * max_views : max_source_len;
  return std::max({transformer.max_len, source, max_target_len});
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json j = {{"kind", kind_name(kind)},
                      {"transformer", transformer_to_json(transformer)},
                      {"max_target_len", max_target_len}};
  if (kind == Kind::kVisual) {
    j["backbone"] = {{"image_height", backbone.image_height}, {"image_width", backbone.image_width},
                     {"patch_size", backbone.patch_size}, {"feature_dim", backbone.feature_dim},
                     {"conv1_channels", backbone.conv1_channels}, {"conv2_channels", backbone.conv2_channels}};
    j["max_views"] = max_views;
  } else {
    j["max_source_len"] = max_source_len;
  }
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  const std::string where = "model config";
  reject_unknown(j, {"kind", "transformer", "backbone", "max_views", "max_source_len", "max_target_len"}, where);
  ModelConfig c;
  std::string kind = "visual";
  read(j, "kind", kind, where);
  if (kind == "visual") {
    c.kind = Kind::kVisual;
  } else if (kind == "text") {
    c.kind = Kind::kText;
  } else {
    throw ConfigError("model kind must be 'visual' or 'text', got '" + kind + "'");
  }
  if (j.contains("transformer")) c.transformer = transformer_from_json(j.at("transformer"));
  if (j.contains("backbone")) {
    const auto& b = j.at("backbone");
    const std::string bw = "backbone config";
    reject_unknown(b, {"image_height", "image_width", "patch_size", "feature_dim", "conv1_channels", "conv2_channels"}, bw);
    read(b, "image_height", c.backbone.image_height, bw);
    read(b, "image_width", c.backbone.image_width, bw);
    read(b, "patch_size", c.backbone.patch_size, bw);
    read(b, "feature_dim", c.backbone.feature_dim, bw);
    read(b, "conv1_channels", c.backbone.conv1_channels, bw);
    read(b, "conv2_channels", c.backbone.conv2_channels, bw);
  }
  read(j, "max_views", c.max_views, where);
  read(j, "max_source_len", c.max_source_len, where);
  read(j, "max_target_len", c.max_target_len, where);
  c.validate();
  return c;
}

Model::Model(const ModelConfig& config, std::size_t source_vocab, std::size_t target_vocab,
             std::uint64_t seed, const std::string& name)
    : config_(config), name_(name), source_vocab_(source_vocab), target_vocab_(target_vocab) {
  config_.validate();
  config_.transformer.max_len = config_.required_positions();
  if (target_vocab <= data::kReservedTokens) throw ConfigError("target vocabulary has no ordinary tokens");
  Rng rng(seed);
  const std::size_t d = config_.transformer.d_model;
  if (config_.kind == Kind::kVisual) {
    backbone_ = vision::Backbone(store_, name + ".backbone", config_.backbone, rng);
    input_projection_ = nn::Linear(store_, name + ".input_projection", config_.backbone.feature_dim, d, rng);
  } else {
    if (source_vocab == 0) throw ConfigError("text model needs a source vocabulary");
    std::vector<double> table(source_vocab * d);
    const double std = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& v : table) v = rng.normal(0.0, std);
    source_embedding_ = store_.add(name + ".source_embedding", Tensor::matrix(source_vocab, d, std::move(table)));
  }
  encoder_ = nn::Encoder(store_, name + ".encoder", config_.transformer, rng);
  decoder_ = nn::Decoder(store_, name + ".decoder", config_.transformer, target_vocab, rng);
}

std::vector<Tensor> Model::encode(const Example& ex, const nn::RunMode& mode) const {
  Tensor input;
  if (config_.kind == Kind::kVisual) {
    if (ex.images.size() > config_.max_views) {
      throw DataError("example has " + std::to_string(ex.images.size()) + " images, model accepts " +
                      std::to_string(config_.max_views));
    }
    input = input_projection_.forward(backbone_.forward(ex.images));
  } else {
    if (ex.source.empty()) throw DataError("text model input is empty");
    if (ex.source.size() > config_.max_source_len) {
      throw DataError("source of length " + std::to_string(ex.source.size()) + " exceeds max_source_len " +
                      std::to_string(config_.max_source_len));
    }
    for (TokenId id : ex.source) {
      if (id < 0 || static_cast<std::size_t>(id) >= source_vocab_) {
        throw DataError("source token id " + std::to_string(id) + " is outside the vocabulary");
      }
    }
    input = scale(embedding(source_embedding_, ex.source),
                  std::sqrt(static_cast<double>(config_.transformer.d_model)));
  }
  return encoder_.forward(input, {}, mode);
}

std::vector<std::uint8_t> Model::source_mask(const Example&) const { return {}; }

Tensor Model::logits(const Example& ex, std::span<const TokenId> prefix, const nn::RunMode& mode) const {
  if (prefix.empty() || prefix[0] != data::kBos) throw DataError("decoder prefix must begin with BOS");
  const auto enc = encode(ex, mode);
  return decoder_.forward(prefix, enc, source_mask(ex), mode);
}

Tensor Model::example_loss(const Example& ex, const nn::RunMode& mode) const {
  if (ex.target.size() + 1 > config_.max_target_len) {
    throw DataError("target of length " + std::to_string(ex.target.size()) + " exceeds max_target_len " +
                    std::to_string(config_.max_target_len) + " (EOS included)");
  }
  std::vector<TokenId> input{data::kBos}, labels;
  input.insert(input.end(), ex.target.begin(), ex.target.end());
  labels.assign(ex.target.begin(), ex.target.end());
  labels.push_back(data::kEos);
  return cross_entropy(logits(ex, input, mode), labels, data::kPad);
}

Tensor Model::batch_loss(std::span<const Example> batch, const nn::RunMode& mode) const {
  if (batch.empty()) throw ContractError("empty batch");
  std::size_t total = 0;
  for (const auto& ex : batch) total += ex.target.size() + 1;
  Tensor loss;
  for (const auto& ex : batch) {
    const double w = static_cast<double>(ex.target.size() + 1) / static_cast<double>(total);
    Tensor term = scale(example_loss(ex, mode), w);
    loss = loss.defined() ? add(loss, term) : term;
  }
  return loss;
}

decoding::StepFn Model::step_fn(const Example& ex) const {
  NoGradScope no_grad;
  auto enc = std::make_shared<std::vector<Tensor>>(encode(ex, nn::RunMode::inference()));
  auto mask = source_mask(ex);
  return [this, enc, mask](std::span<const TokenId> prefix) {
    NoGradScope inner;
    Tensor row = decoder_.forward(prefix, *enc, mask, nn::RunMode::inference(), /*last_only=*/true);
    std::vector<double> lp(row.data().begin(), row.data().end());
    lp[data::kPad] = lp[data::kBos] = lp[data::kUnk] = -INFINITY;
    double mx = -INFINITY;
    for (double v : lp) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : lp) z += v == -INFINITY ? 0.0 : std::exp(v - mx);
    const double log_z = mx + std::log(z);
    for (double& v : lp) {
      if (v != -INFINITY) v -= log_z;
    }
    return lp;
  };
}

decoding::DecodeResult Model::decode(const Example& ex, decoding::DecodeConfig config) const {
  config.bos = data::kBos;
  config.eos = data::kEos;
  config.max_len = std::min(config.max_len, config_.max_target_len);
  auto step = step_fn(ex);
  return config.beam_size == 1 ? decoding::greedy_decode(step, config) : decoding::beam_search(step, config);
}

}  // namespace progen::models

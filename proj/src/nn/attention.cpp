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

#include "nn/attention.hpp"

#include <cmath>

#include "util/error.hpp"

namespace progen::nn {

std::vector<std::uint8_t> AttentionMask::allowed(std::size_t queries, std::size_t keys,
                                                  std::size_t memory) const {
  if (!key_valid.empty() && key_valid.size() != keys) {
    throw DimensionError("attention mask covers " + std::to_string(key_valid.size()) +
                         " keys but the source has " + std::to_string(keys));
  }
  if (causal && queries != keys) {
    throw DimensionError("causal mask needs as many queries as keys (" + std::to_string(queries) +
                         " vs " + std::to_string(keys) + ")");
  }
  const std::size_t width = keys + memory;
  std::vector<std::uint8_t> out(queries * width, 1);
  for (std::size_t i = 0; i < queries; ++i) {
    for (std::size_t j = 0; j < keys; ++j) {
      bool ok = key_valid.empty() || key_valid[j] != 0;
      if (causal && j > i) ok = false;
      out[i * width + j] = ok ? 1 : 0;
    }
  }
  return out;
}

AttentionWeights::AttentionWeights(ParameterStore& store, const std::string& name,
                                   std::size_t d_model, std::size_t heads, Rng& rng)
    : n_heads(heads),
      query(store, name + ".query", d_model, d_model, rng),
      key(store, name + ".key", d_model, d_model, rng),
      value(store, name + ".value", d_model, d_model, rng),
      output(store, name + ".output", d_model, d_model, rng) {
  if (heads == 0 || d_model % heads != 0) {
    throw ConfigError("model width " + std::to_string(d_model) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
}

MemorySlots::MemorySlots(ParameterStore& store, const std::string& name, std::size_t slots,
                         std::size_t d_model, Rng& rng) {
  if (slots == 0) return;
  const double std = 1.0 / std::sqrt(static_cast<double>(d_model));
  auto draw = [&] {
    std::vector<double> data(slots * d_model);
    for (double& v : data) v = rng.normal(0.0, std);
    return Tensor::matrix(slots, d_model, std::move(data));
  };
  keys = store.add(name + ".memory_keys", draw());
  values = store.add(name + ".memory_values", draw());
}

namespace {

Tensor attend(const AttentionWeights& w, const Tensor& query, const Tensor& source,
              const MemorySlots* slots, const AttentionMask& mask, const RunMode& mode,
              const AttentionOptions& options) {
  const std::size_t d = w.d_model();
  if (query.cols() != d || source.cols() != d) {
    throw DimensionError("attention inputs " + shape_str(query.shape()) + " / " +
                         shape_str(source.shape()) + " do not match model width " +
                         std::to_string(d));
  }
  const std::size_t tq = query.rows(), tk = source.rows();
  const std::size_t m = slots ? slots->size() : 0;
  const std::vector<std::uint8_t> allowed = mask.allowed(tq, tk, m);

  Tensor q = w.query.forward(query);
  Tensor k = w.key.forward(source);
  Tensor v = w.value.forward(source);
  if (m > 0) {
    const Tensor ks[] = {k, slots->keys};
    const Tensor vs[] = {v, slots->values};
    k = concat_rows(ks);
    v = concat_rows(vs);
  }
  const std::size_t dh = d / w.n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> heads;
  heads.reserve(w.n_heads);
  for (std::size_t h = 0; h < w.n_heads; ++h) {
    Tensor qh = slice_cols(q, h * dh, dh);
    Tensor kh = slice_cols(k, h * dh, dh);
    Tensor vh = slice_cols(v, h * dh, dh);
    Tensor weights = masked_softmax(scale(matmul(qh, transpose(kh)), inv_sqrt), allowed);
    if (options.weights_out) options.weights_out->push_back(weights);
    heads.push_back(matmul(apply_dropout(weights, options.dropout, mode), vh));
  }
  return w.output.forward(w.n_heads == 1 ? heads[0] : concat_cols(heads));
}

}  // namespace

Tensor multi_head_attention(const AttentionWeights& w, const Tensor& query, const Tensor& source,
                            const AttentionMask& mask, const RunMode& mode,
                            const AttentionOptions& options) {
  return attend(w, query, source, nullptr, mask, mode, options);
}

Tensor memory_augmented_attention(const AttentionWeights& w, const MemorySlots& slots,
                                  const Tensor& x, const AttentionMask& mask,
                                  const RunMode& mode, const AttentionOptions& options) {
  return attend(w, x, x, slots.size() > 0 ? &slots : nullptr, mask, mode, options);
}

Tensor meshed_cross_attention(const AttentionWeights& cross, std::span<const Linear> gates,
                              const Tensor& dec_state, std::span<const Tensor> enc_outputs,
                              const AttentionMask& enc_mask, const RunMode& mode,
                              const AttentionOptions& options, std::vector<Tensor>* gates_out) {
  if (enc_outputs.empty()) throw ContractError("meshed cross-attention needs encoder outputs");
  if (gates.size() != enc_outputs.size()) {
    throw ContractError("meshed cross-attention has " + std::to_string(gates.size()) +
                        " gates for " + std::to_string(enc_outputs.size()) + " encoder layers");
  }
  const std::size_t width = enc_outputs[0].cols();
  Tensor total;
  for (std::size_t l = 0; l < enc_outputs.size(); ++l) {
    if (enc_outputs[l].cols() != width) {
      throw DimensionError("encoder outputs have unequal widths");
    }
    Tensor attended = multi_head_attention(cross, dec_state, enc_outputs[l], enc_mask, mode, options);
    const Tensor both[] = {dec_state, attended};
    Tensor alpha = sigmoid(gates[l].forward(concat_cols(both)));
    if (gates_out) gates_out->push_back(alpha);
    Tensor gated = mul(alpha, attended);
    total = l == 0 ? gated : add(total, gated);
  }
  return scale(total, 1.0 / std::sqrt(static_cast<double>(enc_outputs.size())));
}

}  // namespace progen::nn

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

#include "nn/layers.hpp"

#include <cmath>

#include "util/error.hpp"

namespace progen::nn {

Tensor apply_dropout(const Tensor& x, double rate, const RunMode& mode) {
  if (!mode.training || mode.rng == nullptr || rate <= 0.0) return x;
  return dropout(x, rate, *mode.rng);
}

Tensor init_matrix(std::size_t rows, std::size_t cols, Init init, Rng& rng) {
  std::vector<double> data(rows * cols, 0.0);
  switch (init) {
    case Init::kXavierUniform: {
      const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
      for (double& v : data) v = rng.uniform(-a, a);
      break;
    }
    case Init::kSmallNormal:
      for (double& v : data) v = rng.normal(0.0, 0.02);
      break;
    case Init::kZero:
      break;
  }
  return Tensor::matrix(rows, cols, std::move(data));
}

Linear::Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
               Rng& rng, const std::string& group, Init init) {
  weight_ = store.add(name + ".weight", init_matrix(in, out, init, rng), group);
  bias_ = store.add(name + ".bias", Tensor::zeros({out}), group);
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, std::size_t width) {
  gain_ = store.add(name + ".gain", Tensor::full({width}, 1.0));
  bias_ = store.add(name + ".bias", Tensor::zeros({width}));
}

FeedForward::FeedForward(ParameterStore& store, const std::string& name, std::size_t d_model,
                         std::size_t d_ff, Rng& rng)
    : in_(store, name + ".in", d_model, d_ff, rng), out_(store, name + ".out", d_ff, d_model, rng) {}

Tensor FeedForward::forward(const Tensor& x, double dropout_rate, const RunMode& mode) const {
  return out_.forward(apply_dropout(relu(in_.forward(x)), dropout_rate, mode));
}

Tensor positional_encoding(std::size_t max_len, std::size_t d_model) {
  if (d_model == 0 || d_model % 2 != 0) {
    throw ConfigError("positional encoding needs an even model width, got " +
                      std::to_string(d_model));
  }
  if (max_len == 0) throw ConfigError("positional encoding needs max_len > 0");
  std::vector<double> table(max_len * d_model);
  for (std::size_t p = 0; p < max_len; ++p) {
    for (std::size_t i = 0; i < d_model / 2; ++i) {
      const double freq = std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d_model));
      const double angle = static_cast<double>(p) / freq;
      table[p * d_model + 2 * i] = std::sin(angle);
      table[p * d_model + 2 * i + 1] = std::cos(angle);
    }
  }
  return Tensor::matrix(max_len, d_model, std::move(table));
}

}  // namespace progen::nn

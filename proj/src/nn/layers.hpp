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

#ifndef PROGEN_NN_LAYERS_HPP_
#define PROGEN_NN_LAYERS_HPP_

#include <cstddef>
#include <string>

#include "tensor/ops.hpp"
#include "tensor/parameter_store.hpp"
#include "util/rng.hpp"

namespace progen::nn {

// Training switches for stochastic layers. Dropout only fires when
// `training` is set and a generator is supplied.
struct RunMode {
  bool training = false;
  Rng* rng = nullptr;

  static RunMode inference() { return {}; }
  static RunMode train(Rng& rng) { return {true, &rng}; }
};

Tensor apply_dropout(const Tensor& x, double rate, const RunMode& mode);

enum class Init {
  kXavierUniform,
  kSmallNormal,  // N(0, 0.02^2), used for output heads
  kZero,
};

Tensor init_matrix(std::size_t rows, std::size_t cols, Init init, Rng& rng);

// y = x W + b with W[in x out].
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
         Rng& rng, const std::string& group = kOtherGroup, Init init = Init::kXavierUniform);

  Tensor forward(const Tensor& x) const { return add_bias(matmul(x, weight_), bias_); }

  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }
  std::size_t in_features() const { return weight_.dim(0); }
  std::size_t out_features() const { return weight_.dim(1); }

 private:
  Tensor weight_;
  Tensor bias_;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, std::size_t width);
  Tensor forward(const Tensor& x) const { return layer_norm(x, gain_, bias_); }

 private:
  Tensor gain_;
  Tensor bias_;
};

// Position-wise ReLU network d -> d_ff -> d.
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterStore& store, const std::string& name, std::size_t d_model,
              std::size_t d_ff, Rng& rng);
  Tensor forward(const Tensor& x, double dropout, const RunMode& mode) const;

 private:
  Linear in_;
  Linear out_;
};

// Sinusoidal table: PE[p, 2i] = sin(p / 10000^(2i/d)), PE[p, 2i+1] = cos(...).
// Throws ConfigError for odd d_model.
Tensor positional_encoding(std::size_t max_len, std::size_t d_model);

}  // namespace progen::nn

#endif  // PROGEN_NN_LAYERS_HPP_

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

#ifndef PROGEN_DECODING_DECODING_HPP_
#define PROGEN_DECODING_DECODING_HPP_

#include <functional>
#include <span>
#include <vector>

#include "tensor/ops.hpp"

namespace progen::decoding {

// Maps a prefix (starting with the start symbol) to next-token log-probs.
using StepFn = std::function<std::vector<double>(std::span<const TokenId>)>;

struct DecodeConfig {
  std::size_t beam_size = 3;
  std::size_t max_len = 60;  // generated tokens, EOS included
  double alpha = 0.0;        // length normalization exponent
  TokenId bos = 1;
  TokenId eos = 2;

  void validate() const;  // ConfigError
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // generated tokens, EOS included when finished
  double logprob = 0.0;
  bool finished = false;

  double score(double alpha) const;
  // Generated tokens without the trailing EOS.
  std::vector<TokenId> body() const;
};

struct DecodeResult {
  Hypothesis best;
  bool truncated = false;  // no EOS within max_len
};

DecodeResult greedy_decode(const StepFn& step, const DecodeConfig& config);
DecodeResult beam_search(const StepFn& step, const DecodeConfig& config);

inline constexpr double kExhaustiveLimit = 1e6;
// Argmax of total log-prob over every sequence of at most max_len tokens;
// finished sequences win over unfinished ones. Throws ContractError when
// |V|^max_len exceeds kExhaustiveLimit.
DecodeResult exhaustive_decode(const StepFn& step, const DecodeConfig& config, std::size_t vocab_size);

// Sum of step log-probs of `tokens` after the start symbol.
double rescore(const StepFn& step, const DecodeConfig& config, std::span<const TokenId> tokens);

// Orders by score desc, then token ids lexicographically ascending.
bool better(const Hypothesis& a, const Hypothesis& b, double alpha);

}  // namespace progen::decoding

#endif  // PROGEN_DECODING_DECODING_HPP_

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

#ifndef PROGEN_DATA_VOCAB_HPP_
#define PROGEN_DATA_VOCAB_HPP_

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tensor/ops.hpp"

namespace progen::data {

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kReservedTokens = 4;
inline constexpr std::size_t kDefaultMinFreq = 3;

class Vocab {
 public:
  // Reserved symbols only.
  Vocab();

  // Tokens seen at least `min_freq` times, ordered by (frequency desc,
  // token asc). Throws ContractError for an empty corpus.
  static Vocab build(std::span<const std::vector<std::string>> corpus,
                     std::size_t min_freq = kDefaultMinFreq);
  // Tokens in id order, starting after the reserved symbols.
  static Vocab from_tokens(std::span<const std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  TokenId id(const std::string& token) const;  // UNK when absent
  const std::string& token(TokenId id) const;  // IndexError when out of range

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  // Drops PAD/BOS and stops at the first EOS.
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

  // Non-reserved tokens in id order.
  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  void push(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace progen::data

#endif  // PROGEN_DATA_VOCAB_HPP_

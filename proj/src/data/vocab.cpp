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

#include "data/vocab.hpp"

#include <algorithm>
#include <map>

#include "util/error.hpp"

namespace progen::data {

Vocab::Vocab() {
  for (const char* s : {"<pad>", "<bos>", "<eos>", "<unk>"}) push(s);
}

void Vocab::push(const std::string& token) {
  if (!index_.emplace(token, static_cast<TokenId>(tokens_.size())).second) {
    throw DataError("duplicate vocabulary token '" + token + "'");
  }
  tokens_.push_back(token);
}

Vocab Vocab::build(std::span<const std::vector<std::string>> corpus, std::size_t min_freq) {
  if (corpus.empty()) throw ContractError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& line : corpus) {
    for (const auto& t : line) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, n] : counts) {
    if (n >= min_freq) kept.emplace_back(token, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (const auto& [token, n] : kept) {
    if (!v.contains(token)) v.push(token);
  }
  return v;
}

Vocab Vocab::from_tokens(std::span<const std::string> tokens) {
  Vocab v;
  for (const auto& t : tokens) v.push(t);
  return v;
}

TokenId Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of size " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocab::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  for (TokenId id : ids) {
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    out.push_back(token(id));
  }
  return out;
}

nlohmann::json Vocab::to_json() const {
  return std::vector<std::string>(tokens_.begin() + kReservedTokens, tokens_.end());
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("vocabulary must be a JSON array of tokens");
  std::vector<std::string> tokens;
  for (const auto& t : j) {
    if (!t.is_string()) throw DataError("vocabulary entries must be strings");
    tokens.push_back(t.get<std::string>());
  }
  return from_tokens(tokens);
}

}  // namespace progen::data

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

#ifndef PROGEN_CONCEPTS_CONCEPTS_HPP_
#define PROGEN_CONCEPTS_CONCEPTS_HPP_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "concepts/lexicon.hpp"
#include "json.hpp"

namespace progen::concepts {

inline constexpr std::size_t kTriggerWindow = 6;
inline constexpr std::size_t kAttributeWindow = 3;
inline constexpr const char* kSeparator = "<sep>";
inline constexpr const char* kNone = "none";

enum class Polarity { kPositive, kNegative, kUncertain };

const char* polarity_token(Polarity p);  // "pos" / "neg" / "unc"

struct Mention {
  std::string label;
  Polarity polarity = Polarity::kPositive;
  std::vector<std::string> attributes;
  // Provenance in the source report: sentence index and token range
  // [begin, end) over the whole report's tokens. Not serialized.
  std::size_t sentence = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  // Compares label, polarity and attributes only.
  bool operator==(const Mention& other) const {
    return label == other.label && polarity == other.polarity && attributes == other.attributes;
  }
};

// Lexicon compiled for longest-match lookup.
class Extractor {
 public:
  explicit Extractor(const Lexicon& lexicon);

  std::vector<Mention> extract(std::string_view report) const;
  std::vector<Mention> extract_tokens(std::span<const std::string> tokens) const;

 private:
  using Phrase = std::vector<std::string>;
  // Matches `phrases` (longest first) at position i; returns the length or 0.
  static std::size_t match_at(const std::map<std::string, std::vector<std::pair<Phrase, std::string>>>& index,
                              std::span<const std::string> tokens, std::size_t i, std::size_t end,
                              std::string* label);
  bool trigger_in_window(const std::vector<Phrase>& triggers, std::span<const std::string> tokens,
                         std::size_t lo, std::size_t hi) const;

  std::map<std::string, std::vector<std::pair<Phrase, std::string>>> surfaces_;
  std::vector<Phrase> negation_;
  std::vector<Phrase> uncertainty_;
  std::vector<std::string> attributes_;
};

std::vector<Mention> extract_mentions(std::string_view report, const Lexicon& lexicon);

// "label pol attr... <sep> label pol ..." with spaces in labels written as
// '_'; an empty list is the single token "none".
std::vector<std::string> build_context(std::span<const Mention> mentions);
// Exact inverse of build_context. Throws ParseError naming the token index.
std::vector<Mention> parse_context(std::span<const std::string> tokens);

nlohmann::json mention_to_json(const Mention& m);

}  // namespace progen::concepts

#endif  // PROGEN_CONCEPTS_CONCEPTS_HPP_

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

#ifndef PROGEN_CONCEPTS_LEXICON_HPP_
#define PROGEN_CONCEPTS_LEXICON_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace progen::concepts {

struct LexiconEntry {
  std::string label;  // canonical, words separated by single spaces
  std::vector<std::string> surfaces;
};

struct Lexicon {
  std::vector<LexiconEntry> entries;
  std::vector<std::string> negation;
  std::vector<std::string> uncertainty;
  std::vector<std::string> attributes;  // single tokens

  // Throws ConfigError: uppercase or empty surfaces, duplicate surfaces,
  // empty trigger lists, labels or attributes that clash with the context
  // grammar.
  void validate() const;

  static Lexicon from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static Lexicon load(const std::filesystem::path& path);
};

// The 14 CheXpert categories plus the synthetic glyph kinds.
const Lexicon& default_lexicon();

}  // namespace progen::concepts

#endif  // PROGEN_CONCEPTS_LEXICON_HPP_

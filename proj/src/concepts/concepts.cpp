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

#include "concepts/concepts.hpp"

#include <algorithm>

#include "data/tokenizer.hpp"
#include "util/error.hpp"

namespace progen::concepts {

const char* polarity_token(Polarity p) {
  switch (p) {
    case Polarity::kPositive: return "pos";
    case Polarity::kNegative: return "neg";
    case Polarity::kUncertain: return "unc";
  }
  return "?";
}

Extractor::Extractor(const Lexicon& lexicon) : attributes_(lexicon.attributes) {
  lexicon.validate();
  for (const auto& e : lexicon.entries) {
    for (const auto& s : e.surfaces) {
      Phrase p = data::tokenize(s);
      surfaces_[p.front()].emplace_back(std::move(p), e.label);
    }
  }
  for (auto& [first, list] : surfaces_) {
    std::stable_sort(list.begin(), list.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  }
  for (const auto& t : lexicon.negation) negation_.push_back(data::tokenize(t));
  for (const auto& t : lexicon.uncertainty) uncertainty_.push_back(data::tokenize(t));
}

std::size_t Extractor::match_at(
    const std::map<std::string, std::vector<std::pair<Phrase, std::string>>>& index,
    std::span<const std::string> tokens, std::size_t i, std::size_t end, std::string* label) {
  auto it = index.find(tokens[i]);
  if (it == index.end()) return 0;
  for (const auto& [phrase, name] : it->second) {
    if (i + phrase.size() > end) continue;
    if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      *label = name;
      return phrase.size();
    }
  }
  return 0;
}

bool Extractor::trigger_in_window(const std::vector<Phrase>& triggers,
                                  std::span<const std::string> tokens, std::size_t lo,
                                  std::size_t hi) const {
  for (const auto& t : triggers) {
    for (std::size_t s = lo; s + t.size() <= hi; ++s) {
      if (std::equal(t.begin(), t.end(), tokens.begin() + static_cast<std::ptrdiff_t>(s))) return true;
    }
  }
  return false;
}

std::vector<Mention> Extractor::extract_tokens(std::span<const std::string> tokens) const {
  std::vector<Mention> out;
  std::size_t sentence = 0, start = 0;
  while (start < tokens.size()) {
    std::size_t stop = start;
    while (stop < tokens.size() && tokens[stop] != ".") ++stop;
    for (std::size_t i = start; i < stop;) {
      std::string label;
      const std::size_t len = match_at(surfaces_, tokens, i, stop, &label);
      if (len == 0) {
        ++i;
        continue;
      }
      Mention m;
      m.label = label;
      m.sentence = sentence;
      m.begin = i;
      m.end = i + len;
      const std::size_t lo = i >= start + kTriggerWindow ? i - kTriggerWindow : start;
      if (trigger_in_window(negation_, tokens, lo, i)) {
        m.polarity = Polarity::kNegative;
      } else if (trigger_in_window(uncertainty_, tokens, lo, i)) {
        m.polarity = Polarity::kUncertain;
      }
      const std::size_t alo = i >= start + kAttributeWindow ? i - kAttributeWindow : start;
      const std::size_t ahi = std::min(stop, m.end + kAttributeWindow);
      for (std::size_t k = alo; k < ahi; ++k) {
        if (k >= m.begin && k < m.end) continue;
        const auto& tok = tokens[k];
        if (std::find(attributes_.begin(), attributes_.end(), tok) != attributes_.end() &&
            std::find(m.attributes.begin(), m.attributes.end(), tok) == m.attributes.end()) {
          m.attributes.push_back(tok);
        }
      }
      out.push_back(std::move(m));
      i += len;
    }
    start = stop + 1;
    ++sentence;
  }
  return out;
}

std::vector<Mention> Extractor::extract(std::string_view report) const {
  const auto tokens = data::tokenize(report);
  return extract_tokens(tokens);
}

std::vector<Mention> extract_mentions(std::string_view report, const Lexicon& lexicon) {
  return Extractor(lexicon).extract(report);
}

std::vector<std::string> build_context(std::span<const Mention> mentions) {
  if (mentions.empty()) return {kNone};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    if (i > 0) out.emplace_back(kSeparator);
    std::string label = mentions[i].label;
    std::replace(label.begin(), label.end(), ' ', '_');
    out.push_back(label);
    out.emplace_back(polarity_token(mentions[i].polarity));
    for (const auto& a : mentions[i].attributes) out.push_back(a);
  }
  return out;
}

std::vector<Mention> parse_context(std::span<const std::string> tokens) {
  auto fail = [](std::size_t pos, const std::string& why) -> ParseError {
    return ParseError("context token " + std::to_string(pos) + ": " + why);
  };
  if (tokens.empty()) throw fail(0, "empty context");
  if (tokens.size() == 1 && tokens[0] == kNone) return {};
  std::vector<Mention> out;
  std::size_t i = 0;
  while (true) {
    if (i >= tokens.size()) throw fail(i, "expected a label");
    const std::string& label = tokens[i];
    if (label == kSeparator || label == kNone || label == "pos" || label == "neg" || label == "unc") {
      throw fail(i, "expected a label, found '" + label + "'");
    }
    Mention m;
    m.label = label;
    std::replace(m.label.begin(), m.label.end(), '_', ' ');
    ++i;
    if (i >= tokens.size()) throw fail(i, "missing polarity after '" + label + "'");
    if (tokens[i] == "pos") {
      m.polarity = Polarity::kPositive;
    } else if (tokens[i] == "neg") {
      m.polarity = Polarity::kNegative;
    } else if (tokens[i] == "unc") {
      m.polarity = Polarity::kUncertain;
    } else {
      throw fail(i, "expected pos/neg/unc, found '" + tokens[i] + "'");
    }
    ++i;
    while (i < tokens.size() && tokens[i] != kSeparator) {
      if (tokens[i] == kNone || tokens[i] == "pos" || tokens[i] == "neg" || tokens[i] == "unc") {
        throw fail(i, "unexpected '" + tokens[i] + "' among attributes");
      }
      m.attributes.push_back(tokens[i++]);
    }
    out.push_back(std::move(m));
    if (i == tokens.size()) break;
    ++i;  // separator
  }
  return out;
}

nlohmann::json mention_to_json(const Mention& m) {
  return {{"label", m.label},
          {"polarity", polarity_token(m.polarity)},
          {"attributes", m.attributes},
          {"sentence", m.sentence},
          {"span", {m.begin, m.end}}};
}

}  // namespace progen::concepts

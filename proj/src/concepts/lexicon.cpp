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

#include "concepts/lexicon.hpp"

#include <cctype>
#include <set>

#include "data/annotations.hpp"
#include "data/tokenizer.hpp"
#include "util/error.hpp"

namespace progen::concepts {
namespace {

bool is_normalized(const std::string& phrase) {
  if (phrase.empty()) return false;
  const auto tokens = data::tokenize(phrase);
  return data::join_tokens(tokens) == phrase;
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ConfigError(std::string("lexicon field '") + key + "' must be a list of strings");
  }
  std::vector<std::string> out;
  for (const auto& s : j.at(key)) {
    if (!s.is_string()) throw ConfigError(std::string("lexicon field '") + key + "' must hold strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace

void Lexicon::validate() const {
  static const std::set<std::string> reserved = {"pos", "neg", "unc", "<sep>", "none"};
  if (entries.empty()) throw ConfigError("lexicon has no labels");
  if (negation.empty() || uncertainty.empty()) throw ConfigError("lexicon trigger lists must be non-empty");
  std::set<std::string> labels, surfaces;
  for (const auto& e : entries) {
    if (!is_normalized(e.label) || e.label.find('_') != std::string::npos || reserved.count(e.label)) {
      throw ConfigError("invalid lexicon label '" + e.label + "'");
    }
    if (!labels.insert(e.label).second) throw ConfigError("duplicate lexicon label '" + e.label + "'");
    if (e.surfaces.empty()) throw ConfigError("label '" + e.label + "' has no surfaces");
    for (const auto& s : e.surfaces) {
      if (!is_normalized(s)) throw ConfigError("surface '" + s + "' is not lowercase tokenized text");
      if (!surfaces.insert(s).second) throw ConfigError("surface '" + s + "' appears under two labels");
    }
  }
  for (const auto* list : {&negation, &uncertainty}) {
    for (const auto& t : *list) {
      if (!is_normalized(t)) throw ConfigError("trigger '" + t + "' is not lowercase tokenized text");
    }
  }
  for (const auto& a : attributes) {
    if (!is_normalized(a) || data::tokenize(a).size() != 1 || reserved.count(a)) {
      throw ConfigError("attribute '" + a + "' must be a single lowercase token");
    }
  }
}

Lexicon Lexicon::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("labels") || !j.at("labels").is_object()) {
    throw ConfigError("lexicon must be an object with a 'labels' map");
  }
  Lexicon lex;
  for (const auto& [label, surfaces] : j.at("labels").items()) {
    LexiconEntry e{label, {}};
    if (!surfaces.is_array()) throw ConfigError("surfaces of '" + label + "' must be a list");
    for (const auto& s : surfaces) {
      if (!s.is_string()) throw ConfigError("surfaces of '" + label + "' must be strings");
      e.surfaces.push_back(s.get<std::string>());
    }
    lex.entries.push_back(std::move(e));
  }
  lex.negation = string_list(j, "negation");
  lex.uncertainty = string_list(j, "uncertainty");
  lex.attributes = string_list(j, "attributes");
  lex.validate();
  return lex;
}

nlohmann::json Lexicon::to_json() const {
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& e : entries) labels[e.label] = e.surfaces;
  return {{"labels", labels}, {"negation", negation}, {"uncertainty", uncertainty}, {"attributes", attributes}};
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  try {
    return from_json(data::read_json_file(path));
  } catch (const ConfigError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

const Lexicon& default_lexicon() {
  static const Lexicon lex = [] {
    Lexicon l;
    l.entries = {
        {"no finding", {"no acute disease", "no acute cardiopulmonary abnormality",
                        "no acute cardiopulmonary process", "no active disease", "normal chest"}},
        {"enlarged cardiomediastinum", {"enlarged cardiomediastinum", "widened mediastinum",
                                        "mediastinal widening"}},
        {"cardiomegaly", {"cardiomegaly", "enlarged heart", "cardiac enlargement"}},
        {"lung opacity", {"lung opacity", "opacity", "opacities", "airspace opacity", "airspace disease"}},
        {"lung lesion", {"lung lesion", "lesion", "nodule", "nodules", "mass"}},
        {"pulmonary edema", {"pulmonary edema", "edema", "vascular congestion"}},
        {"consolidation", {"consolidation", "consolidations"}},
        {"pneumonia", {"pneumonia", "infection"}},
        {"atelectasis", {"atelectasis", "atelectatic change"}},
        {"pneumothorax", {"pneumothorax", "pneumothoraces"}},
        {"pleural effusion", {"pleural effusion", "pleural effusions", "effusion", "effusions"}},
        {"pleural other", {"pleural thickening", "pleural scarring", "fibrothorax"}},
        {"fracture", {"fracture", "fractures"}},
        {"support devices", {"support devices", "pacemaker", "catheter", "endotracheal tube", "picc line"}},
        {"square", {"square"}},
        {"cross", {"cross"}},
        {"blob", {"blob"}},
    };
    l.negation = {"no", "not", "without", "no evidence of", "free of", "negative for", "absence of"};
    l.uncertainty = {"may", "possible", "possibly", "cannot exclude", "likely", "questionable",
                     "suspicious for", "concerning for", "suggestive of", "could"};
    l.attributes = {"mild", "moderate", "severe", "minimal", "trace", "small", "large",
                    "bilateral", "left", "right", "upper", "lower", "basilar", "new",
                    "stable", "increased", "decreased",
                    "upper-left", "upper-right", "lower-left", "lower-right"};
    l.validate();
    return l;
  }();
  return lex;
}

}  // namespace progen::concepts

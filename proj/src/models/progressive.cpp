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

#include "models/progressive.hpp"

#include "concepts/concepts.hpp"
#include "util/error.hpp"

namespace progen::models {

GenerationResult generate_from_concepts(const Model& lm, const data::Vocab& concept_vocab,
                                        const data::Vocab& report_vocab, std::vector<std::string> concepts,
                                        const decoding::DecodeConfig& config) {
  if (lm.config().kind != Kind::kText) throw ContractError("second stage must be a text model");
  if (lm.source_vocab() != concept_vocab.size() || lm.target_vocab() != report_vocab.size()) {
    throw ContractError("language model vocabularies do not match the supplied vocabularies");
  }
  if (concepts.empty()) concepts.push_back(concepts::kNone);
  if (concepts.size() > lm.config().max_source_len) concepts.resize(lm.config().max_source_len);

  GenerationResult out;
  Example ex;
  ex.source = concept_vocab.encode(concepts);
  out.concepts = std::move(concepts);
  const auto decoded = lm.decode(ex, config);
  out.report = report_vocab.decode(decoded.best.tokens);
  out.report_truncated = decoded.truncated;
  return out;
}

GenerationResult generate_progressive(const Model& vilm, const Model& lm, const data::Vocab& concept_vocab,
                                      const data::Vocab& report_vocab, std::span<const vision::Image> images,
                                      const decoding::DecodeConfig& config) {
  if (vilm.config().kind != Kind::kVisual) throw ContractError("first stage must be a visual model");
  if (vilm.target_vocab() != concept_vocab.size()) {
    throw ContractError("visual model vocabulary does not match the concept vocabulary");
  }
  Example ex;
  ex.images.assign(images.begin(), images.end());
  const auto first = vilm.decode(ex, config);
  auto result = generate_from_concepts(lm, concept_vocab, report_vocab, concept_vocab.decode(first.best.tokens),
                                       config);
  result.concepts_truncated = first.truncated;
  return result;
}

GenerationResult generate_single_stage(const Model& model, const data::Vocab& report_vocab,
                                       std::span<const vision::Image> images,
                                       const decoding::DecodeConfig& config) {
  if (model.config().kind != Kind::kVisual) throw ContractError("single-stage model must be a visual model");
  if (model.target_vocab() != report_vocab.size()) {
    throw ContractError("model vocabulary does not match the report vocabulary");
  }
  Example ex;
  ex.images.assign(images.begin(), images.end());
  const auto decoded = model.decode(ex, config);
  GenerationResult out;
  out.report = report_vocab.decode(decoded.best.tokens);
  out.report_truncated = decoded.truncated;
  return out;
}

}  // namespace progen::models

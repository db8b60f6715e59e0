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

#ifndef PROGEN_MODELS_PROGRESSIVE_HPP_
#define PROGEN_MODELS_PROGRESSIVE_HPP_

#include <span>
#include <string>
#include <vector>

#include "data/vocab.hpp"
#include "models/model.hpp"

namespace progen::models {

struct GenerationResult {
  std::vector<std::string> concepts;  // stage-one context tokens, "none" when empty
  std::vector<std::string> report;
  bool concepts_truncated = false;
  bool report_truncated = false;

  bool truncated() const { return concepts_truncated || report_truncated; }
};

// Images -> concept context (ViLM over the concept vocabulary) -> report
// (LM over the report vocabulary). The LM source vocabulary is the concept
// vocabulary.
GenerationResult generate_progressive(const Model& vilm, const Model& lm, const data::Vocab& concept_vocab,
                                      const data::Vocab& report_vocab, std::span<const vision::Image> images,
                                      const decoding::DecodeConfig& config);

// Second stage alone, from an already decoded concept context.
GenerationResult generate_from_concepts(const Model& lm, const data::Vocab& concept_vocab,
                                        const data::Vocab& report_vocab, std::vector<std::string> concepts,
                                        const decoding::DecodeConfig& config);

// Images -> report with one visual model over the report vocabulary.
GenerationResult generate_single_stage(const Model& model, const data::Vocab& report_vocab,
                                       std::span<const vision::Image> images,
                                       const decoding::DecodeConfig& config);

}  // namespace progen::models

#endif  // PROGEN_MODELS_PROGRESSIVE_HPP_

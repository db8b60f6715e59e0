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

#ifndef PROGEN_PIPELINE_PIPELINE_HPP_
#define PROGEN_PIPELINE_PIPELINE_HPP_

#include <filesystem>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "concepts/lexicon.hpp"
#include "data/annotations.hpp"
#include "data/vocab.hpp"
#include "metrics/metrics.hpp"
#include "models/model.hpp"
#include "pipeline/run_config.hpp"

namespace progen::pipeline {

inline constexpr const char* kVilmCheckpoint = "vilm.ckpt";
inline constexpr const char* kLmCheckpoint = "lm.ckpt";
inline constexpr const char* kBaselineCheckpoint = "baseline.ckpt";
inline constexpr const char* kGeneratedFile = "generated.json";
inline constexpr const char* kGeneratedSingleFile = "generated_single.json";

// The lexicon file when present, the built-in lexicon otherwise.
concepts::Lexicon load_lexicon(const std::filesystem::path& path);

struct ConceptRecord {
  std::string id;
  data::Split split = data::Split::kTrain;
  std::vector<std::string> context;
  std::vector<concepts::Mention> mentions;
};

// Runs the extractor over every record and writes the concepts file
// (config path unless `out` is given).
std::vector<ConceptRecord> extract_concepts(const RunConfig& config, const std::filesystem::path& out = {});
void save_concepts(const std::filesystem::path& path, const std::vector<ConceptRecord>& records);
// Mentions are not read back; only ids, splits and contexts.
std::vector<ConceptRecord> load_concepts(const std::filesystem::path& path);

enum class Phase { kAll, kVilm, kLm, kBaseline };

Phase parse_phase(const std::string& name);

struct StageSummary {
  std::string stage;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_val_bleu4 = 0.0;
  double last_train_loss = 0.0;
};

// Trains the requested stages on the configured corpus and writes
// <run_dir>/<stage>.ckpt and <run_dir>/<stage>.log.jsonl. kAll trains ViLM
// then LM; the baseline is only trained on request.
std::vector<StageSummary> train(const RunConfig& config, Phase phase, std::ostream* progress = nullptr);

// A stage restored from its checkpoint together with its vocabularies.
struct LoadedStage {
  std::string stage;
  std::unique_ptr<models::Model> model;
  data::Vocab source_vocab;  // text models only
  data::Vocab target_vocab;
};
LoadedStage load_stage(const std::filesystem::path& path);

struct GeneratedRecord {
  std::string id;
  std::vector<std::string> concepts;  // empty for single-stage output
  std::string report;
  bool truncated = false;
};

std::vector<GeneratedRecord> generate(const RunConfig& config, bool single_stage, data::Split split);
void save_generated(const std::filesystem::path& path, const std::vector<GeneratedRecord>& records);
std::vector<GeneratedRecord> load_generated(const std::filesystem::path& path);

struct Evaluation {
  metrics::EvalReport mean;
  std::vector<metrics::EvalReport> runs;
  std::string diff;  // aligned mention highlighting for the first run
};

// Scores each generated set against the references of `split` and averages
// field-wise. Throws DataError listing ids missing on either side.
Evaluation evaluate(const std::vector<std::vector<GeneratedRecord>>& runs, const std::vector<data::CorpusRecord>& records,
                    data::Split split, const concepts::Lexicon& lexicon, std::size_t threads, bool with_diff);

nlohmann::json evaluation_to_json(const Evaluation& e);

// Report pair with shared mentions (same label and polarity) bracketed on
// both sides.
std::string diff_pair(const std::string& id, const std::string& generated, const std::string& reference,
                      const concepts::Lexicon& lexicon);

}  // namespace progen::pipeline

#endif  // PROGEN_PIPELINE_PIPELINE_HPP_

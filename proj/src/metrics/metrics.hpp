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

#ifndef PROGEN_METRICS_METRICS_HPP_
#define PROGEN_METRICS_METRICS_HPP_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "concepts/concepts.hpp"
#include "json.hpp"

namespace progen::metrics {

using Tokens = std::vector<std::string>;

inline constexpr double kRougeBeta = 1.2;

// Corpus BLEU-1..4 against one reference per candidate, no smoothing.
// Throws ContractError for empty or misaligned corpora.
std::array<double, 4> bleu(std::span<const Tokens> candidates, std::span<const Tokens> references);

// Clipped n-gram matches and candidate n-gram totals for one pair.
struct NgramStats {
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
};
NgramStats ngram_stats(const Tokens& candidate, const Tokens& reference);
std::array<double, 4> bleu_from_stats(std::span<const NgramStats> stats);

std::size_t lcs_length(const Tokens& a, const Tokens& b);
double rouge_l_pair(const Tokens& candidate, const Tokens& reference);
double rouge_l(std::span<const Tokens> candidates, std::span<const Tokens> references);

struct Alignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};
// Exact-match alignment built greedily from the longest common unaligned
// runs (ties: earliest candidate position, then earliest reference position).
Alignment meteor_align(const Tokens& candidate, const Tokens& reference);
double meteor_pair(const Tokens& candidate, const Tokens& reference);
double meteor_lite(std::span<const Tokens> candidates, std::span<const Tokens> references);

struct CeCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
};
struct CeScores {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};
// Positive labels of a report; the last mention of a label decides it.
std::vector<std::string> positive_labels(std::span<const concepts::Mention> mentions);
CeCounts ce_counts(std::span<const concepts::Mention> generated, std::span<const concepts::Mention> reference);
// Micro-averaged over positive labels. A corpus with no positive labels on
// either side scores 1 on all three.
CeScores ce_scores(const CeCounts& counts);
CeScores clinical_efficacy(std::span<const std::string> generated, std::span<const std::string> references,
                           const concepts::Lexicon& lexicon);

struct EvalReport {
  std::array<double, 4> bleu{};
  double meteor = 0.0;
  double rouge_l = 0.0;
  CeScores ce;
  std::size_t n_pairs = 0;
  std::size_t runs = 1;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

// Scores raw report texts; per-pair work is spread over `threads` workers
// and reduced in pair order, so the result does not depend on `threads`.
EvalReport evaluate(std::span<const std::string> generated, std::span<const std::string> references,
                    const concepts::Lexicon& lexicon, std::size_t threads = 1);

// Field-wise arithmetic mean; `runs` is the number of reports.
EvalReport average(std::span<const EvalReport> reports);

}  // namespace progen::metrics

#endif  // PROGEN_METRICS_METRICS_HPP_

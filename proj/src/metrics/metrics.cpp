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

#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "data/tokenizer.hpp"
#include "util/error.hpp"

namespace progen::metrics {
namespace {

void check_aligned(std::size_t a, std::size_t b) {
  if (a == 0) throw ContractError("cannot score an empty corpus");
  if (a != b) {
    throw ContractError("corpus sizes differ: " + std::to_string(a) + " candidates vs " +
                        std::to_string(b) + " references");
  }
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const Tokens& t, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    ++counts[std::vector<std::string>(t.begin() + static_cast<std::ptrdiff_t>(i),
                                      t.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

// Runs `fn(i)` for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

NgramStats ngram_stats(const Tokens& candidate, const Tokens& reference) {
  NgramStats s;
  s.cand_len = candidate.size();
  s.ref_len = reference.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    for (const auto& [gram, count] : cand) {
      auto it = ref.find(gram);
      s.matches[n - 1] += it == ref.end() ? 0 : std::min(count, it->second);
      s.totals[n - 1] += count;
    }
  }
  return s;
}

std::array<double, 4> bleu_from_stats(std::span<const NgramStats> stats) {
  NgramStats total;
  for (const auto& s : stats) {
    for (std::size_t k = 0; k < 4; ++k) {
      total.matches[k] += s.matches[k];
      total.totals[k] += s.totals[k];
    }
    total.cand_len += s.cand_len;
    total.ref_len += s.ref_len;
  }
  std::array<double, 4> out{};
  if (total.cand_len == 0) return out;
  const double bp = total.cand_len > total.ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(total.ref_len) / static_cast<double>(total.cand_len));
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    if (total.matches[n] == 0 || total.totals[n] == 0) zero = true;
    if (!zero) {
      log_sum += std::log(static_cast<double>(total.matches[n]) / static_cast<double>(total.totals[n]));
    }
    out[n] = zero ? 0.0 : bp * std::exp(log_sum / static_cast<double>(n + 1));
  }
  return out;
}

std::array<double, 4> bleu(std::span<const Tokens> candidates, std::span<const Tokens> references) {
  check_aligned(candidates.size(), references.size());
  std::vector<NgramStats> stats;
  for (std::size_t i = 0; i < candidates.size(); ++i) stats.push_back(ngram_stats(candidates[i], references[i]));
  return bleu_from_stats(stats);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_pair(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  const double b2 = kRougeBeta * kRougeBeta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

double rouge_l(std::span<const Tokens> candidates, std::span<const Tokens> references) {
  check_aligned(candidates.size(), references.size());
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += rouge_l_pair(candidates[i], references[i]);
  return total / static_cast<double>(candidates.size());
}

Alignment meteor_align(const Tokens& candidate, const Tokens& reference) {
  const std::size_t n = candidate.size(), m = reference.size();
  std::vector<bool> used_c(n, false), used_r(m, false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  while (true) {
    std::size_t best = 0, bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        std::size_t len = 0;
        while (i + len < n && j + len < m && !used_c[i + len] && !used_r[j + len] &&
               candidate[i + len] == reference[j + len]) {
          ++len;
        }
        if (len > best) {
          best = len;
          bi = i;
          bj = j;
        }
      }
    }
    if (best == 0) break;
    for (std::size_t k = 0; k < best; ++k) {
      used_c[bi + k] = used_r[bj + k] = true;
      pairs.emplace_back(bi + k, bj + k);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  Alignment a;
  a.matches = pairs.size();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (k == 0 || pairs[k].first != pairs[k - 1].first + 1 || pairs[k].second != pairs[k - 1].second + 1) {
      ++a.chunks;
    }
  }
  return a;
}

double meteor_pair(const Tokens& candidate, const Tokens& reference) {
  const Alignment a = meteor_align(candidate, reference);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double fmean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(a.chunks) / m;
  return fmean * (1.0 - 0.5 * frag * frag * frag);
}

double meteor_lite(std::span<const Tokens> candidates, std::span<const Tokens> references) {
  check_aligned(candidates.size(), references.size());
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += meteor_pair(candidates[i], references[i]);
  return total / static_cast<double>(candidates.size());
}

std::vector<std::string> positive_labels(std::span<const concepts::Mention> mentions) {
  std::map<std::string, concepts::Polarity> last;
  for (const auto& m : mentions) last[m.label] = m.polarity;
  std::vector<std::string> out;
  for (const auto& [label, pol] : last) {
    if (pol == concepts::Polarity::kPositive) out.push_back(label);
  }
  return out;
}

CeCounts ce_counts(std::span<const concepts::Mention> generated, std::span<const concepts::Mention> reference) {
  const auto gen = positive_labels(generated);
  const auto ref = positive_labels(reference);
  CeCounts c;
  for (const auto& g : gen) {
    if (std::binary_search(ref.begin(), ref.end(), g)) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  for (const auto& r : ref) {
    if (!std::binary_search(gen.begin(), gen.end(), r)) ++c.fn;
  }
  return c;
}

CeScores ce_scores(const CeCounts& c) {
  if (c.tp + c.fp + c.fn == 0) return {1.0, 1.0, 1.0};
  CeScores s;
  const double tp = static_cast<double>(c.tp);
  s.precision = c.tp + c.fp == 0 ? 0.0 : tp / static_cast<double>(c.tp + c.fp);
  s.recall = c.tp + c.fn == 0 ? 0.0 : tp / static_cast<double>(c.tp + c.fn);
  s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

CeScores clinical_efficacy(std::span<const std::string> generated, std::span<const std::string> references,
                           const concepts::Lexicon& lexicon) {
  check_aligned(generated.size(), references.size());
  concepts::Extractor ex(lexicon);
  CeCounts total;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const CeCounts c = ce_counts(ex.extract(generated[i]), ex.extract(references[i]));
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return ce_scores(total);
}

nlohmann::json EvalReport::to_json() const {
  return {{"bleu", bleu},
          {"meteor", meteor},
          {"rouge_l", rouge_l},
          {"ce", {{"p", ce.precision}, {"r", ce.recall}, {"f1", ce.f1}}},
          {"n_pairs", n_pairs},
          {"runs", runs}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.bleu = j.at("bleu").get<std::array<double, 4>>();
    r.meteor = j.at("meteor").get<double>();
    r.rouge_l = j.at("rouge_l").get<double>();
    r.ce.precision = j.at("ce").at("p").get<double>();
    r.ce.recall = j.at("ce").at("r").get<double>();
    r.ce.f1 = j.at("ce").at("f1").get<double>();
    r.n_pairs = j.at("n_pairs").get<std::size_t>();
    r.runs = j.value("runs", std::size_t{1});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metrics JSON: ") + e.what());
  }
}

EvalReport evaluate(std::span<const std::string> generated, std::span<const std::string> references,
                    const concepts::Lexicon& lexicon, std::size_t threads) {
  check_aligned(generated.size(), references.size());
  const std::size_t n = generated.size();
  const concepts::Extractor ex(lexicon);
  std::vector<NgramStats> stats(n);
  std::vector<double> rouge(n), meteor(n);
  std::vector<CeCounts> ce(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const Tokens cand = data::tokenize(generated[i]);
    const Tokens ref = data::tokenize(references[i]);
    stats[i] = ngram_stats(cand, ref);
    rouge[i] = rouge_l_pair(cand, ref);
    meteor[i] = meteor_pair(cand, ref);
    ce[i] = ce_counts(ex.extract_tokens(cand), ex.extract_tokens(ref));
  });
  EvalReport r;
  r.n_pairs = n;
  r.bleu = bleu_from_stats(stats);
  CeCounts total;
  for (std::size_t i = 0; i < n; ++i) {
    r.rouge_l += rouge[i];
    r.meteor += meteor[i];
    total.tp += ce[i].tp;
    total.fp += ce[i].fp;
    total.fn += ce[i].fn;
  }
  r.rouge_l /= static_cast<double>(n);
  r.meteor /= static_cast<double>(n);
  r.ce = ce_scores(total);
  return r;
}

EvalReport average(std::span<const EvalReport> reports) {
  if (reports.empty()) throw ContractError("nothing to average");
  EvalReport out;
  out.n_pairs = reports[0].n_pairs;
  out.runs = reports.size();
  for (const auto& r : reports) {
    if (r.n_pairs != out.n_pairs) throw DataError("runs were scored on different numbers of pairs");
    for (std::size_t k = 0; k < 4; ++k) out.bleu[k] += r.bleu[k];
    out.meteor += r.meteor;
    out.rouge_l += r.rouge_l;
    out.ce.precision += r.ce.precision;
    out.ce.recall += r.ce.recall;
    out.ce.f1 += r.ce.f1;
  }
  const double k = static_cast<double>(reports.size());
  for (double& b : out.bleu) b /= k;
  out.meteor /= k;
  out.rouge_l /= k;
  out.ce.precision /= k;
  out.ce.recall /= k;
  out.ce.f1 /= k;
  return out;
}

}  // namespace progen::metrics

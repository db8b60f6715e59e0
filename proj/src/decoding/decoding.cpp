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

#include "decoding/decoding.hpp"

#include <algorithm>
#include <cmath>

#include "util/error.hpp"

namespace progen::decoding {
namespace {

std::vector<double> run_step(const StepFn& step, const DecodeConfig& config, std::span<const TokenId> generated) {
  std::vector<TokenId> prefix;
  prefix.reserve(generated.size() + 1);
  prefix.push_back(config.bos);
  prefix.insert(prefix.end(), generated.begin(), generated.end());
  std::vector<double> lp = step(prefix);
  if (lp.empty()) throw ContractError("step function returned no scores");
  if (config.eos < 0 || static_cast<std::size_t>(config.eos) >= lp.size()) {
    throw ContractError("EOS id " + std::to_string(config.eos) + " is outside the step vocabulary");
  }
  return lp;
}

}  // namespace

void DecodeConfig::validate() const {
  if (beam_size == 0) throw ConfigError("beam size must be at least 1");
  if (max_len == 0) throw ConfigError("max_len must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("length_norm_alpha must lie in [0, 1]");
}

double Hypothesis::score(double alpha) const {
  if (alpha == 0.0 || tokens.empty()) return logprob;
  return logprob / std::pow(static_cast<double>(tokens.size()), alpha);
}

std::vector<TokenId> Hypothesis::body() const {
  std::vector<TokenId> out = tokens;
  if (finished && !out.empty()) out.pop_back();
  return out;
}

bool better(const Hypothesis& a, const Hypothesis& b, double alpha) {
  const double sa = a.score(alpha), sb = b.score(alpha);
  if (sa != sb) return sa > sb;
  return std::lexicographical_compare(a.tokens.begin(), a.tokens.end(), b.tokens.begin(), b.tokens.end());
}

DecodeResult greedy_decode(const StepFn& step, const DecodeConfig& config) {
  config.validate();
  Hypothesis h;
  while (h.tokens.size() < config.max_len) {
    const auto lp = run_step(step, config, h.tokens);
    // max_element returns the first maximum, i.e. the smallest id.
    const auto best = static_cast<TokenId>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    h.tokens.push_back(best);
    h.logprob += lp[static_cast<std::size_t>(best)];
    if (best == config.eos) {
      h.finished = true;
      break;
    }
  }
  return {h, !h.finished};
}

DecodeResult beam_search(const StepFn& step, const DecodeConfig& config) {
  config.validate();
  std::vector<Hypothesis> active(1), finished;
  for (std::size_t t = 0; t < config.max_len && !active.empty(); ++t) {
    std::vector<Hypothesis> expansions;
    for (const Hypothesis& h : active) {
      const auto lp = run_step(step, config, h.tokens);
      for (std::size_t v = 0; v < lp.size(); ++v) {
        if (lp[v] == -INFINITY) continue;
        Hypothesis next = h;
        next.tokens.push_back(static_cast<TokenId>(v));
        next.logprob += lp[v];
        next.finished = static_cast<TokenId>(v) == config.eos;
        expansions.push_back(std::move(next));
      }
    }
    const std::size_t keep = std::min(config.beam_size, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep), expansions.end(),
                      [](const Hypothesis& a, const Hypothesis& b) { return better(a, b, 0.0); });
    expansions.resize(keep);
    active.clear();
    for (auto& h : expansions) (h.finished ? finished : active).push_back(std::move(h));
    // Without length normalization, extending can only lower a score.
    if (config.alpha == 0.0 && !finished.empty() && !active.empty()) {
      double best_finished = -INFINITY;
      for (const auto& f : finished) best_finished = std::max(best_finished, f.logprob);
      if (best_finished > active.front().logprob) break;
    }
  }
  const auto& pool = finished.empty() ? active : finished;
  if (pool.empty()) throw NumericError("beam search found no hypothesis with finite log-probability");
  Hypothesis best = pool.front();
  for (const auto& h : pool) {
    if (better(h, best, config.alpha)) best = h;
  }
  return {best, !best.finished};
}

DecodeResult exhaustive_decode(const StepFn& step, const DecodeConfig& config, std::size_t vocab_size) {
  config.validate();
  if (std::pow(static_cast<double>(vocab_size), static_cast<double>(config.max_len)) > kExhaustiveLimit) {
    throw ContractError("exhaustive search over " + std::to_string(vocab_size) + "^" +
                        std::to_string(config.max_len) + " sequences exceeds the limit");
  }
  Hypothesis best_finished, best_open;
  bool have_finished = false, have_open = false;
  std::vector<TokenId> tokens;
  std::function<void(double)> visit = [&](double logprob) {
    const auto lp = run_step(step, config, tokens);
    for (std::size_t v = 0; v < lp.size(); ++v) {
      tokens.push_back(static_cast<TokenId>(v));
      Hypothesis h{tokens, logprob + lp[v], static_cast<TokenId>(v) == config.eos};
      if (h.finished) {
        if (!have_finished || better(h, best_finished, 0.0)) best_finished = h;
        have_finished = true;
      } else if (tokens.size() == config.max_len) {
        if (!have_open || better(h, best_open, 0.0)) best_open = h;
        have_open = true;
      } else {
        visit(h.logprob);
      }
      tokens.pop_back();
    }
  };
  visit(0.0);
  if (have_finished) return {best_finished, false};
  return {best_open, true};
}

double rescore(const StepFn& step, const DecodeConfig& config, std::span<const TokenId> tokens) {
  double total = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto lp = run_step(step, config, tokens.subspan(0, t));
    total += lp.at(static_cast<std::size_t>(tokens[t]));
  }
  return total;
}

}  // namespace progen::decoding

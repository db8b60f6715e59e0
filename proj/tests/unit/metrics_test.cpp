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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>

#include "data/tokenizer.hpp"
#include "support/metric_oracles.hpp"
#include "metrics/metrics.hpp"
#include "util/error.hpp"
#include "util/rng.hpp"

namespace progen::metrics {
namespace {

using testing::brute_bleu;
using testing::memo_lcs;
using testing::random_tokens;
using testing::straight_meteor;

TEST(Bleu, IdentityIsOne) {
  std::vector<Tokens> c = {data::tokenize("the cat sat on the mat ."), data::tokenize("a b c d e")};
  for (double b : bleu(c, c)) EXPECT_EQ(b, 1.0);
}

TEST(Bleu, ClippedUnigramPrecision) {
  const Tokens cand = data::tokenize("the the the the the the the");
  const Tokens ref = data::tokenize("the cat the mat");
  NgramStats s = ngram_stats(cand, ref);
  EXPECT_EQ(s.matches[0], 2u);
  EXPECT_EQ(s.totals[0], 7u);
  EXPECT_EQ(static_cast<double>(s.matches[0]) / static_cast<double>(s.totals[0]), 2.0 / 7.0);
  // Candidate longer than reference: no brevity penalty, BLEU-1 is the precision.
  const Tokens c1[] = {cand}, r1[] = {ref};
  EXPECT_EQ(bleu(c1, r1)[0], 2.0 / 7.0);
}

TEST(Bleu, MatchesBruteForceOracle) {
  Rng rng(1);
  for (int corpus = 0; corpus < 25; ++corpus) {
    std::vector<Tokens> c, r;
    for (std::size_t i = 0, n = 1 + rng.below(6); i < n; ++i) {
      c.push_back(random_tokens(rng, 12, 4));
      r.push_back(random_tokens(rng, 12, 4));
    }
    const auto got = bleu(c, r), want = brute_bleu(c, r);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(got[k], want[k]) << corpus << " n=" << k + 1;
  }
}

TEST(Bleu, PermutationInvariantAndBounded) {
  Rng rng(2);
  std::vector<Tokens> c, r;
  for (int i = 0; i < 8; ++i) {
    c.push_back(random_tokens(rng, 10, 3));
    r.push_back(random_tokens(rng, 10, 3));
  }
  auto a = bleu(c, r);
  std::reverse(c.begin(), c.end());
  std::reverse(r.begin(), r.end());
  auto b = bleu(c, r);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(a[k], b[k]);
    EXPECT_GE(a[k], 0.0);
    EXPECT_LE(a[k], 1.0);
  }
}

TEST(Bleu, Errors) {
  std::vector<Tokens> one = {{"a"}}, none;
  EXPECT_THROW(bleu(none, none), ContractError);
  std::vector<Tokens> two = {{"a"}, {"b"}};
  EXPECT_THROW(bleu(one, two), ContractError);
}

TEST(Rouge, KnownValues) {
  const Tokens a = data::tokenize("the cat sat"), b = data::tokenize("the cat");
  const double p = 2.0 / 3.0, r = 1.0, b2 = 1.44;
  EXPECT_EQ(rouge_l_pair(a, b), (1.0 + b2) * p * r / (r + b2 * p));
  EXPECT_EQ(rouge_l_pair(a, a), 1.0);
  EXPECT_EQ(rouge_l_pair({}, a), 0.0);
}

TEST(Rouge, DpMatchesMemoizedRecursion) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Tokens a = random_tokens(rng, 15, 4), b = random_tokens(rng, 15, 4);
    ASSERT_EQ(lcs_length(a, b), memo_lcs(a, b));
  }
  for (int corpus = 0; corpus < 20; ++corpus) {
    std::vector<Tokens> c, r;
    double want = 0.0;
    for (int i = 0; i < 5; ++i) {
      c.push_back(random_tokens(rng, 10, 4));
      r.push_back(random_tokens(rng, 10, 4));
      const double l = static_cast<double>(memo_lcs(c.back(), r.back()));
      if (l > 0.0) {
        const double p = l / static_cast<double>(c.back().size()), rr = l / static_cast<double>(r.back().size());
        want += (1.0 + kRougeBeta * kRougeBeta) * p * rr / (rr + kRougeBeta * kRougeBeta * p);
      }
    }
    EXPECT_EQ(rouge_l(c, r), want / 5.0);
  }
}

TEST(Meteor, FormulaCases) {
  const Tokens a = data::tokenize("there is a small left effusion");
  const double len = static_cast<double>(a.size());
  EXPECT_EQ(meteor_pair(a, a), 1.0 * (1.0 - 0.5 * std::pow(1.0 / len, 3)));
  EXPECT_EQ(meteor_pair(a, data::tokenize("nothing here matches")), 0.0);
  Alignment al = meteor_align(data::tokenize("a b c d"), data::tokenize("c d a b"));
  EXPECT_EQ(al.matches, 4u);
  EXPECT_EQ(al.chunks, 2u);
}

TEST(Meteor, MatchesStraightLineImplementation) {
  Rng rng(4);
  for (int corpus = 0; corpus < 25; ++corpus) {
    for (int i = 0; i < 8; ++i) {
      Tokens c = random_tokens(rng, 14, 4), r = random_tokens(rng, 14, 4);
      ASSERT_LT(std::abs(meteor_pair(c, r) - straight_meteor(c, r)), 1e-12);
    }
  }
}

TEST(Ce, ByDefinition) {
  const auto& lex = concepts::default_lexicon();
  const std::string same[] = {"mild edema . no pneumothorax .", "normal chest ."};
  auto s = clinical_efficacy(same, same, lex);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.f1, 1.0);
  const std::string gen[] = {"there is edema and pneumonia ."};
  const std::string ref[] = {"pneumonia with cardiomegaly ."};
  s = clinical_efficacy(gen, ref, lex);
  EXPECT_EQ(s.precision, 0.5);
  EXPECT_EQ(s.recall, 0.5);
  EXPECT_EQ(s.f1, 0.5);
  const std::string empty[] = {"the lungs are clear ."};
  EXPECT_EQ(clinical_efficacy(empty, empty, lex).f1, 1.0);
  EXPECT_EQ(clinical_efficacy(empty, ref, lex).f1, 0.0);
}

TEST(Ce, LastMentionWins) {
  const auto& lex = concepts::default_lexicon();
  const std::string gen[] = {"edema . no edema ."};
  const std::string ref[] = {"edema ."};
  EXPECT_EQ(clinical_efficacy(gen, ref, lex).recall, 0.0);
}

TEST(Ce, NegationInflation) {
  const auto& lex = concepts::default_lexicon();
  std::vector<std::string> gen = {"edema .", "pleural effusion . cardiomegaly .", "normal chest ."};
  std::vector<std::string> ref = {"edema . atelectasis .", "pleural effusion .", "normal chest ."};
  const CeScores base = clinical_efficacy(gen, ref, lex);
  auto negated = gen;
  for (auto& g : negated) g += " no pneumonia .";
  const CeScores neg = clinical_efficacy(negated, ref, lex);
  EXPECT_EQ(neg.precision, base.precision);
  EXPECT_EQ(neg.recall, base.recall);
  EXPECT_EQ(neg.f1, base.f1);
  auto wrong = gen;
  wrong[0] += " pneumonia .";
  EXPECT_LT(clinical_efficacy(wrong, ref, lex).precision, base.precision);
  EXPECT_NEAR(base.f1, 2 * base.precision * base.recall / (base.precision + base.recall), 1e-12);
}

TEST(Evaluate, ThreadCountDoesNotChangeResult) {
  Rng rng(5);
  std::vector<std::string> gen, ref;
  const char* words[] = {"edema", "no", "pneumonia", "mild", ".", "there", "is", "effusion"};
  for (int i = 0; i < 40; ++i) {
    std::string g, r;
    for (int k = 0; k < 12; ++k) {
      g += std::string(words[rng.below(8)]) + " ";
      r += std::string(words[rng.below(8)]) + " ";
    }
    gen.push_back(g);
    ref.push_back(r);
  }
  const auto& lex = concepts::default_lexicon();
  auto a = evaluate(gen, ref, lex, 1), b = evaluate(gen, ref, lex, 4);
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(EvalReport::from_json(a.to_json()).to_json(), a.to_json());
  auto same = evaluate(gen, gen, lex, 2);
  EXPECT_EQ(same.bleu[3], 1.0);
  EXPECT_EQ(same.rouge_l, 1.0);
  EXPECT_EQ(same.ce.f1, 1.0);
}

TEST(Evaluate, DisjointVocabularyScoresZero) {
  const std::string gen[] = {"alpha beta gamma"}, ref[] = {"delta epsilon"};
  auto r = evaluate(gen, ref, concepts::default_lexicon());
  for (double b : r.bleu) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(r.meteor, 0.0);
  EXPECT_EQ(r.rouge_l, 0.0);
}

TEST(Evaluate, AverageIsArithmeticMean) {
  Rng rng(6);
  std::vector<EvalReport> runs(5);
  for (auto& r : runs) {
    for (double& b : r.bleu) b = rng.uniform();
    r.meteor = rng.uniform();
    r.rouge_l = rng.uniform();
    r.ce = {rng.uniform(), rng.uniform(), rng.uniform()};
    r.n_pairs = 10;
  }
  EvalReport avg = average(runs);
  double want = 0.0;
  for (const auto& r : runs) want += r.meteor;
  EXPECT_NEAR(avg.meteor, want / 5.0, 1e-12);
  EXPECT_EQ(avg.runs, 5u);
}

}  // namespace
}  // namespace progen::metrics

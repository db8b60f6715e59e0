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

#include <filesystem>
#include <fstream>
#include <iterator>

#include "data/annotations.hpp"
#include "data/checkpoint.hpp"
#include "data/synth.hpp"
#include "data/tokenizer.hpp"
#include "data/vocab.hpp"
#include "util/error.hpp"
#include "util/rng.hpp"
#include "vision/image_io.hpp"

namespace progen::data {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("progen_data_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<unsigned char> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Tokenizer, Rules) {
  EXPECT_EQ(tokenize("No acute disease."), (std::vector<std::string>{"no", "acute", "disease", "."}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("  A,b:c;D 12mm.\n"),
            (std::vector<std::string>{"a", ",", "b", ":", "c", ";", "d", "12mm", "."}));
}

TEST(Tokenizer, Idempotent) {
  Rng rng(1);
  const std::string alphabet = "abcXYZ019 .,:;-\t\n";
  for (int trial = 0; trial < 200; ++trial) {
    std::string line;
    for (std::size_t i = 0, n = rng.below(40); i < n; ++i) line += alphabet[rng.below(alphabet.size())];
    auto once = tokenize(line);
    EXPECT_EQ(tokenize(join_tokens(once)), once) << line;
  }
}

TEST(Vocab, ReservedAndThreshold) {
  std::vector<std::vector<std::string>> corpus = {{"a", "a", "a", "a", "a", "b", "b"}};
  Vocab v = Vocab::build(corpus, 3);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v.id("a"), 4);
  EXPECT_EQ(v.id("b"), kUnk);
  EXPECT_EQ(v.token(kPad), "<pad>");
  EXPECT_EQ(v.token(kEos), "<eos>");
  EXPECT_THROW(v.token(9), IndexError);
  EXPECT_THROW(Vocab::build({}, 3), ContractError);
}

TEST(Vocab, OrderIsFrequencyThenLexical) {
  std::vector<std::vector<std::string>> corpus = {{"z", "z", "z", "y", "y", "y", "x", "x", "x", "x"}};
  Vocab v = Vocab::build(corpus, 1);
  EXPECT_EQ(v.id("x"), 4);
  EXPECT_EQ(v.id("y"), 5);
  EXPECT_EQ(v.id("z"), 6);
}

TEST(Vocab, DeterministicAndRoundTrips) {
  Rng rng(2);
  std::vector<std::vector<std::string>> corpus(50);
  for (auto& line : corpus) {
    for (int i = 0; i < 10; ++i) line.push_back("w" + std::to_string(rng.below(30)));
  }
  Vocab a = Vocab::build(corpus, 2), b = Vocab::build(corpus, 2);
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(Vocab::from_json(a.to_json()), a);
  std::vector<std::string> in_vocab;
  for (std::size_t id = kReservedTokens; id < a.size(); ++id) in_vocab.push_back(a.token(static_cast<TokenId>(id)));
  EXPECT_EQ(a.decode(a.encode(in_vocab)), in_vocab);
}

TEST(Vocab, DecodeStopsAtEos) {
  Vocab v = Vocab::from_tokens(std::vector<std::string>{"a", "b"});
  const TokenId ids[] = {kBos, 4, kPad, 5, kEos, 4};
  EXPECT_EQ(v.decode(ids), (std::vector<std::string>{"a", "b"}));
}

TEST(Annotations, RoundTripAndErrors) {
  fs::path dir = fresh_dir("ann");
  std::vector<CorpusRecord> recs = {{"r1", {"a.pgm", "b.pgm"}, "text .", Split::kTrain},
                                    {"r2", {"c.pgm"}, "more .", Split::kTest}};
  save_annotations(dir / "a.json", recs);
  auto back = load_annotations(dir / "a.json");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].image_paths, recs[0].image_paths);
  EXPECT_EQ(back[1].split, Split::kTest);

  std::ofstream(dir / "bad.json") << R"({"train": [{"id": "x", "image_path": ["p"]}], "val": [], "test": []})";
  try {
    load_annotations(dir / "bad.json");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("record 0"), std::string::npos);
    EXPECT_NE(msg.find("report"), std::string::npos);
    EXPECT_NE(msg.find("bad.json"), std::string::npos);
  }
  std::ofstream(dir / "junk.json") << "{not json";
  EXPECT_THROW(load_annotations(dir / "junk.json"), DataError);
}

TEST(Annotations, AcceptsSharedSplitShape) {
  // Shape of the widely used public split files: extra keys, string ids.
  const auto j = nlohmann::json::parse(R"({
    "train": [{"id": "CXR2384_IM-0942", "report": "The heart is normal in size.",
               "image_path": ["CXR2384_IM-0942/0.png", "CXR2384_IM-0942/1.png"], "split": "train"}],
    "val": [], "test": []})");
  auto recs = parse_annotations(j, "inline");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].image_paths.size(), 2u);
}

TEST(Checkpoint, BitwiseRoundTrip) {
  ParameterStore store;
  Rng rng(3);
  std::vector<double> v(12);
  for (double& x : v) x = rng.normal();
  v[0] = -0.0;
  v[1] = 5e-324;
  store.add("a.weight", Tensor::matrix(3, 4, v));
  store.add("b", Tensor::full({2, 1, 3}, 0.1));
  fs::path p = fresh_dir("ckpt") / "m.ckpt";
  save_checkpoint(p, capture(store, R"({"k": 1})"));
  Checkpoint back = load_checkpoint(p);
  EXPECT_EQ(back.config_json, R"({"k": 1})");
  ASSERT_EQ(back.arrays.size(), 2u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back.arrays[0].values[i]), std::bit_cast<std::uint64_t>(v[i]));
  }
  EXPECT_EQ(encode_checkpoint(back), file_bytes(p));

  ParameterStore other;
  other.add("a.weight", Tensor::zeros({3, 4}));
  other.add("b", Tensor::zeros({2, 1, 3}));
  apply(back, other);
  EXPECT_EQ(other.get("a.weight")[5], v[5]);
  ParameterStore wrong;
  wrong.add("a.weight", Tensor::zeros({4, 3}));
  wrong.add("b", Tensor::zeros({2, 1, 3}));
  EXPECT_THROW(apply(back, wrong), CorruptionError);
}

TEST(Checkpoint, CorruptionAndVersion) {
  ParameterStore store;
  store.add("w", Tensor::full({4}, 2.0));
  auto bytes = encode_checkpoint(capture(store, "{}"));
  for (std::size_t cut : {bytes.size() - 1, bytes.size() / 2, std::size_t{10}, std::size_t{3}}) {
    std::vector<unsigned char> shorter(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(decode_checkpoint(shorter, "t"), CorruptionError) << cut;
  }
  auto flipped = bytes;
  flipped[30] ^= 1;
  EXPECT_THROW(decode_checkpoint(flipped, "t"), CorruptionError);
  auto newer = bytes;
  newer[4] = 2;
  EXPECT_THROW(decode_checkpoint(newer, "t"), UnsupportedVersionError);
}

TEST(Synth, DeterministicAndWellFormed) {
  auto a = synth_corpus(7, 30, 5, 5);
  auto b = synth_corpus(7, 30, 5, 5);
  ASSERT_EQ(a.size(), 40u);
  bool saw_empty = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].record.report, b[i].record.report);
    EXPECT_EQ(a[i].image.pixels, b[i].image.pixels);
    EXPECT_EQ(a[i].image.height, 32u);
    if (a[i].record.report == "no findings .") {
      saw_empty = true;
      EXPECT_TRUE(a[i].mentions.empty());
    }
  }
  EXPECT_TRUE(saw_empty);
  EXPECT_NE(synth_corpus(8, 30, 5, 5)[0].image.pixels, a[0].image.pixels);
  EXPECT_EQ(quadrant_name(0, 3, 4), "upper-right");
  EXPECT_EQ(quadrant_name(2, 1, 4), "lower-left");
}

TEST(Synth, WrittenCorpusIsLossless) {
  fs::path dir = fresh_dir("synth");
  auto samples = synth_corpus(11, 4, 2, 2);
  write_synth_corpus(dir, samples);
  auto recs = load_annotations(dir / "annotation.json");
  ASSERT_EQ(recs.size(), samples.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].report, samples[i].record.report);
    auto img = vision::read_image(resolve_image(dir, recs[i].image_paths[0]));
    EXPECT_EQ(img.pixels, samples[i].image.pixels);
  }
  EXPECT_TRUE(fs::exists(dir / "lexicon.json"));
}

TEST(Synth, VocabFromTrainSplitMapsUnseenToUnk) {
  std::vector<CorpusRecord> recs = {{"t", {"x"}, "there is a cross in the upper-left .", Split::kTrain},
                                    {"v", {"x"}, "there is a zebra .", Split::kVal}};
  std::vector<std::vector<std::string>> train;
  for (const auto& r : records_in(recs, Split::kTrain)) train.push_back(tokenize(r.report));
  Vocab v = Vocab::build(train, 1);
  auto ids = v.encode(tokenize(recs[1].report));
  EXPECT_EQ(ids[3], kUnk);
  EXPECT_NE(ids[2], kUnk);
}

}  // namespace
}  // namespace progen::data

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
#include <sstream>
#include <string>

#include "json.hpp"
#include "progen/progen.h"

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CapiTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("progen_capi_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    ASSERT_EQ(progen_synth((root_ / "data").c_str(), 3, 12, 4, 5, 4), PROGEN_OK) << progen_last_error();
    nlohmann::json cfg = {
        {"model",
         {{"d_model", 16}, {"n_heads", 2}, {"d_ff", 32}, {"memory_slots", 2}, {"feature_dim", 16},
          {"conv1_channels", 2}, {"conv2_channels", 4}}},
        {"training", {{"epochs", 2}, {"batch_size", 4}, {"min_freq", 1}, {"seed", 5}}},
        {"paths", {{"data_dir", "data"}, {"run_dir", "run"}}}};
    std::ofstream(root_ / "config.json") << cfg.dump(2);
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  progen_config* load() {
    progen_config* c = nullptr;
    EXPECT_EQ(progen_config_load((root_ / "config.json").c_str(), &c), PROGEN_OK) << progen_last_error();
    return c;
  }

  static fs::path root_;
};

fs::path CapiTest::root_;

TEST_F(CapiTest, ConfigErrorsAreUsageErrors) {
  EXPECT_STRNE(progen_version(), "");
  progen_config* c = nullptr;
  EXPECT_EQ(progen_config_load((root_ / "missing.json").c_str(), &c), PROGEN_ERR_USAGE);
  EXPECT_EQ(c, nullptr);
  EXPECT_NE(std::string(progen_last_error()).find("missing.json"), std::string::npos);

  std::ofstream(root_ / "bad.json") << R"({"training": {"epochz": 3}})";
  EXPECT_EQ(progen_config_load((root_ / "bad.json").c_str(), &c), PROGEN_ERR_USAGE);
  EXPECT_NE(std::string(progen_last_error()).find("epochz"), std::string::npos);
  EXPECT_EQ(progen_config_load(nullptr, nullptr), PROGEN_ERR_USAGE);

  c = load();
  EXPECT_EQ(progen_config_set_beam(c, 0), PROGEN_ERR_USAGE);
  char* json = nullptr;
  ASSERT_EQ(progen_config_to_json(c, &json), PROGEN_OK);
  EXPECT_EQ(nlohmann::json::parse(json)["training"]["epochs"], 2);
  progen_string_free(json);
  progen_config_free(c);
}

TEST_F(CapiTest, EndToEndThroughTheInterface) {
  progen_config* c = load();
  ASSERT_EQ(progen_extract_concepts(c, nullptr), PROGEN_OK) << progen_last_error();
  EXPECT_TRUE(fs::exists(root_ / "run" / "concepts.json"));

  int lines = 0;
  auto count = [](const char*, void* user) { ++*static_cast<int*>(user); };
  ASSERT_EQ(progen_train(c, PROGEN_PHASE_ALL, count, &lines), PROGEN_OK) << progen_last_error();
  EXPECT_EQ(lines, 4);
  EXPECT_TRUE(fs::exists(root_ / "run" / "vilm.ckpt"));
  EXPECT_TRUE(fs::exists(root_ / "run" / "lm.ckpt"));

  ASSERT_EQ(progen_generate(c, 0, PROGEN_SPLIT_TEST, nullptr), PROGEN_OK) << progen_last_error();
  const auto gen = nlohmann::json::parse(slurp(root_ / "run" / "generated.json"));
  ASSERT_EQ(gen.size(), 5u);
  for (const auto& r : gen) {
    EXPECT_TRUE(r.contains("id") && r.contains("concepts") && r.contains("report") && r.contains("truncated"));
  }

  // References scored against themselves.
  const auto ann = nlohmann::json::parse(slurp(root_ / "data" / "annotation.json"));
  nlohmann::json self = nlohmann::json::array();
  for (const auto& r : ann["test"]) self.push_back({{"id", r["id"]}, {"report", r["report"]}});
  std::ofstream(root_ / "self.json") << self.dump();
  const std::string self_path = (root_ / "self.json").string();
  const char* files[] = {self_path.c_str()};
  char* json = nullptr;
  ASSERT_EQ(progen_evaluate(c, files, 1, nullptr, nullptr, PROGEN_SPLIT_TEST, nullptr, nullptr, 1, &json), PROGEN_OK)
      << progen_last_error();
  const auto metrics = nlohmann::json::parse(json);
  progen_string_free(json);
  EXPECT_DOUBLE_EQ(metrics["bleu"][3].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(metrics["ce"]["f1"].get<double>(), 1.0);

  // Missing ids are a data error naming the id.
  self.erase(0);
  std::ofstream(root_ / "short.json") << self.dump();
  const std::string short_path = (root_ / "short.json").string();
  const char* short_files[] = {short_path.c_str()};
  EXPECT_EQ(progen_evaluate(c, short_files, 1, nullptr, nullptr, PROGEN_SPLIT_TEST, nullptr, nullptr, 1, nullptr),
            PROGEN_ERR_DATA);
  EXPECT_NE(std::string(progen_last_error()).find(ann["test"][0]["id"].get<std::string>()), std::string::npos);

  progen_generator* g = nullptr;
  ASSERT_EQ(progen_generator_open((root_ / "run" / "vilm.ckpt").c_str(), (root_ / "run" / "lm.ckpt").c_str(), &g),
            PROGEN_OK)
      << progen_last_error();
  const std::string image = (root_ / "data" / ann["test"][0]["image_path"][0].get<std::string>()).string();
  const char* images[] = {image.c_str()};
  char* report = nullptr;
  char* concepts = nullptr;
  int truncated = -1;
  ASSERT_EQ(progen_generator_run(g, images, 1, 1, &report, &concepts, &truncated), PROGEN_OK) << progen_last_error();
  EXPECT_TRUE(truncated == 0 || truncated == 1);
  EXPECT_STRNE(concepts, "");
  progen_string_free(report);
  progen_string_free(concepts);
  const char* missing[] = {"/nonexistent.pgm"};
  EXPECT_EQ(progen_generator_run(g, missing, 1, 1, &report, nullptr, nullptr), PROGEN_ERR_DATA);
  progen_generator_free(g);

  EXPECT_EQ(progen_generator_open_single((root_ / "run" / "lm.ckpt").c_str(), &g), PROGEN_ERR_DATA);
  progen_config_free(c);
}

TEST_F(CapiTest, CorruptAnnotationsAreDataErrors) {
  const fs::path dir = root_ / "corrupt";
  fs::create_directories(dir);
  std::ofstream(dir / "annotation.json") << R"({"train": [{"id": "a", "image_path": ["x.pgm"]}], "val": [], "test": []})";
  nlohmann::json cfg = {{"paths", {{"data_dir", "."}, {"run_dir", "run"}}}};
  std::ofstream(dir / "config.json") << cfg.dump();
  progen_config* c = nullptr;
  ASSERT_EQ(progen_config_load((dir / "config.json").c_str(), &c), PROGEN_OK);
  EXPECT_EQ(progen_train(c, PROGEN_PHASE_ALL, nullptr, nullptr), PROGEN_ERR_DATA);
  const std::string msg = progen_last_error();
  EXPECT_NE(msg.find("annotation.json"), std::string::npos) << msg;
  EXPECT_NE(msg.find("record 0"), std::string::npos) << msg;
  progen_config_free(c);
}

}  // namespace

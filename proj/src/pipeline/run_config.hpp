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

#ifndef PROGEN_PIPELINE_RUN_CONFIG_HPP_
#define PROGEN_PIPELINE_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "models/model.hpp"

namespace progen::pipeline {

struct ModelSection {
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_enc_layers = 2;
  std::size_t n_dec_layers = 2;
  std::size_t d_ff = 128;
  std::size_t memory_slots = 8;  // visual models
  bool mesh = true;              // visual models
  std::size_t lm_memory_slots = 0;
  bool lm_mesh = false;
  double dropout = 0.1;
  std::size_t image_size = 32;
  std::size_t patch_size = 8;
  std::size_t feature_dim = 64;
  std::size_t conv1_channels = 8;
  std::size_t conv2_channels = 16;
  std::size_t max_views = 2;
  std::size_t max_concept_len = 60;
  std::size_t max_report_len = 100;
};

struct TrainingSection {
  std::size_t batch_size = 16;
  double lr_visual = 5e-5;
  double lr_other = 1e-4;
  std::size_t epochs = 100;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
  std::size_t min_freq = 3;
  bool shared_vocab = false;
};

struct DecodeSection {
  std::size_t beam = 3;
  double alpha = 0.0;
};

struct PathsSection {
  std::filesystem::path data_dir;     // image paths are relative to this
  std::filesystem::path annotations;  // default <data_dir>/annotation.json
  std::filesystem::path lexicon;      // default <data_dir>/lexicon.json, built-in if absent
  std::filesystem::path run_dir;      // checkpoints, logs, outputs
  std::filesystem::path concepts;     // default <run_dir>/concepts.json
};

struct RunConfig {
  std::string preset = "desk";
  ModelSection model;
  TrainingSection training;
  DecodeSection decode;
  PathsSection paths;

  // Throws ConfigError on inconsistent values.
  void validate() const;

  models::ModelConfig vilm_config() const;
  models::ModelConfig lm_config() const;
  models::ModelConfig baseline_config() const;

  nlohmann::json to_json() const;
};

// Named presets: "desk" and "paper".
RunConfig preset(const std::string& name);

// Applies `j` over the preset it names (default "desk"). Relative paths are
// resolved against `base_dir`. Unknown keys raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace progen::pipeline

#endif  // PROGEN_PIPELINE_RUN_CONFIG_HPP_

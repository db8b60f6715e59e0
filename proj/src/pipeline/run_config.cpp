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

#include "pipeline/run_config.hpp"

#include <set>

#include "data/annotations.hpp"
#include "util/error.hpp"

namespace progen::pipeline {
namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(where + "." + key + " must be a non-negative integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  } else {
    if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  }
  out = v.get<T>();
}

void read_path(const nlohmann::json& j, const char* key, std::filesystem::path& out,
               const std::filesystem::path& base) {
  std::string s;
  read(j, key, s, "paths");
  if (s.empty()) return;
  const std::filesystem::path p(s);
  out = p.is_absolute() ? p : base / p;
}

}  // namespace

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "desk") {
    // Higher rates than the paper's: every stage trains from scratch here.
    c.training.lr_visual = 1e-3;
    c.training.lr_other = 1e-3;
    c.training.epochs = 20;
    c.model.dropout = 0.1;
  } else if (name == "paper") {
    c.model.d_model = 512;
    c.model.n_heads = 8;
    c.model.n_enc_layers = 3;
    c.model.n_dec_layers = 3;
    c.model.d_ff = 2048;
    c.model.memory_slots = 40;
    c.model.image_size = 224;
    c.model.patch_size = 32;
    c.model.feature_dim = 1024;
    c.model.conv1_channels = 16;
    c.model.conv2_channels = 32;
    c.training.lr_visual = 5e-5;
    c.training.lr_other = 1e-4;
    c.training.epochs = 100;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected 'desk' or 'paper')");
  }
  return c;
}

void RunConfig::validate() const {
  if (training.batch_size == 0) throw ConfigError("training.batch_size must be positive");
  if (training.epochs == 0) throw ConfigError("training.epochs must be positive");
  if (!(training.lr_visual > 0.0) || !(training.lr_other > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (training.min_freq == 0) throw ConfigError("training.min_freq must be positive");
  if (decode.beam == 0) throw ConfigError("decode.beam must be positive");
  if (decode.alpha < 0.0) throw ConfigError("decode.alpha must be non-negative");
  vilm_config().validate();
  lm_config().validate();
  baseline_config().validate();
}

models::ModelConfig RunConfig::vilm_config() const {
  models::ModelConfig c;
  c.kind = models::Kind::kVisual;
  c.transformer.d_model = model.d_model;
  c.transformer.n_heads = model.n_heads;
  c.transformer.n_enc_layers = model.n_enc_layers;
  c.transformer.n_dec_layers = model.n_dec_layers;
  c.transformer.d_ff = model.d_ff;
  c.transformer.memory_slots = model.memory_slots;
  c.transformer.mesh = model.mesh;
  c.transformer.dropout = model.dropout;
  c.backbone.image_height = model.image_size;
  c.backbone.image_width = model.image_size;
  c.backbone.patch_size = model.patch_size;
  c.backbone.feature_dim = model.feature_dim;
  c.backbone.conv1_channels = model.conv1_channels;
  c.backbone.conv2_channels = model.conv2_channels;
  c.max_views = model.max_views;
  c.max_target_len = model.max_concept_len;
  c.transformer.max_len = c.required_positions();
  return c;
}

models::ModelConfig RunConfig::lm_config() const {
  models::ModelConfig c = vilm_config();
  c.kind = models::Kind::kText;
  c.transformer.memory_slots = model.lm_memory_slots;
  c.transformer.mesh = model.lm_mesh;
  c.max_source_len = model.max_concept_len;
  c.max_target_len = model.max_report_len;
  c.transformer.max_len = c.required_positions();
  return c;
}

models::ModelConfig RunConfig::baseline_config() const {
  models::ModelConfig c = vilm_config();
  c.max_target_len = model.max_report_len;
  c.transformer.max_len = c.required_positions();
  return c;
}

nlohmann::json RunConfig::to_json() const {
  return {
      {"preset", preset},
      {"model",
       {{"d_model", model.d_model}, {"n_heads", model.n_heads}, {"n_enc_layers", model.n_enc_layers},
        {"n_dec_layers", model.n_dec_layers}, {"d_ff", model.d_ff}, {"memory_slots", model.memory_slots},
        {"mesh", model.mesh}, {"lm_memory_slots", model.lm_memory_slots}, {"lm_mesh", model.lm_mesh},
        {"dropout", model.dropout}, {"image_size", model.image_size}, {"patch_size", model.patch_size},
        {"feature_dim", model.feature_dim}, {"conv1_channels", model.conv1_channels},
        {"conv2_channels", model.conv2_channels}, {"max_views", model.max_views},
        {"max_concept_len", model.max_concept_len}, {"max_report_len", model.max_report_len}}},
      {"training",
       {{"batch_size", training.batch_size}, {"lr_visual", training.lr_visual}, {"lr_other", training.lr_other},
        {"epochs", training.epochs}, {"patience", training.patience}, {"seed", training.seed},
        {"min_freq", training.min_freq}, {"shared_vocab", training.shared_vocab}}},
      {"decode", {{"beam", decode.beam}, {"alpha", decode.alpha}}},
      {"paths",
       {{"data_dir", paths.data_dir.string()}, {"annotations", paths.annotations.string()},
        {"lexicon", paths.lexicon.string()}, {"run_dir", paths.run_dir.string()},
        {"concepts", paths.concepts.string()}}},
  };
}

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, {"preset", "model", "training", "decode", "paths"}, "run config");
  std::string name = "desk";
  read(j, "preset", name, "run config");
  RunConfig c = preset(name);

  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m,
                   {"d_model", "n_heads", "n_enc_layers", "n_dec_layers", "d_ff", "memory_slots", "mesh",
                    "lm_memory_slots", "lm_mesh", "dropout", "image_size", "patch_size", "feature_dim",
                    "conv1_channels", "conv2_channels", "max_views", "max_concept_len", "max_report_len"},
                   "model");
    read(m, "d_model", c.model.d_model, "model");
    read(m, "n_heads", c.model.n_heads, "model");
    read(m, "n_enc_layers", c.model.n_enc_layers, "model");
    read(m, "n_dec_layers", c.model.n_dec_layers, "model");
    read(m, "d_ff", c.model.d_ff, "model");
    read(m, "memory_slots", c.model.memory_slots, "model");
    read(m, "mesh", c.model.mesh, "model");
    read(m, "lm_memory_slots", c.model.lm_memory_slots, "model");
    read(m, "lm_mesh", c.model.lm_mesh, "model");
    read(m, "dropout", c.model.dropout, "model");
    read(m, "image_size", c.model.image_size, "model");
    read(m, "patch_size", c.model.patch_size, "model");
    read(m, "feature_dim", c.model.feature_dim, "model");
    read(m, "conv1_channels", c.model.conv1_channels, "model");
    read(m, "conv2_channels", c.model.conv2_channels, "model");
    read(m, "max_views", c.model.max_views, "model");
    read(m, "max_concept_len", c.model.max_concept_len, "model");
    read(m, "max_report_len", c.model.max_report_len, "model");
  }
  if (j.contains("training")) {
    const auto& t = j.at("training");
    reject_unknown(t, {"batch_size", "lr_visual", "lr_other", "epochs", "patience", "seed", "min_freq", "shared_vocab"},
                   "training");
    read(t, "batch_size", c.training.batch_size, "training");
    read(t, "lr_visual", c.training.lr_visual, "training");
    read(t, "lr_other", c.training.lr_other, "training");
    read(t, "epochs", c.training.epochs, "training");
    read(t, "patience", c.training.patience, "training");
    read(t, "seed", c.training.seed, "training");
    read(t, "min_freq", c.training.min_freq, "training");
    read(t, "shared_vocab", c.training.shared_vocab, "training");
  }
  if (j.contains("decode")) {
    const auto& d = j.at("decode");
    reject_unknown(d, {"beam", "alpha"}, "decode");
    read(d, "beam", c.decode.beam, "decode");
    read(d, "alpha", c.decode.alpha, "decode");
  }
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    reject_unknown(p, {"data_dir", "annotations", "lexicon", "run_dir", "concepts"}, "paths");
    read_path(p, "data_dir", c.paths.data_dir, base_dir);
    read_path(p, "annotations", c.paths.annotations, base_dir);
    read_path(p, "lexicon", c.paths.lexicon, base_dir);
    read_path(p, "run_dir", c.paths.run_dir, base_dir);
    read_path(p, "concepts", c.paths.concepts, base_dir);
  }
  if (c.paths.data_dir.empty()) c.paths.data_dir = base_dir;
  if (c.paths.annotations.empty()) c.paths.annotations = c.paths.data_dir / "annotation.json";
  if (c.paths.lexicon.empty()) c.paths.lexicon = c.paths.data_dir / "lexicon.json";
  if (c.paths.run_dir.empty()) c.paths.run_dir = base_dir / "run";
  if (c.paths.concepts.empty()) c.paths.concepts = c.paths.run_dir / "concepts.json";
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = data::read_json_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return run_config_from_json(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace progen::pipeline

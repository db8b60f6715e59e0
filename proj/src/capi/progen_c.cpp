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

#include "progen/progen.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "data/annotations.hpp"
#include "data/synth.hpp"
#include "data/tokenizer.hpp"
#include "models/progressive.hpp"
#include "pipeline/pipeline.hpp"
#include "util/error.hpp"
#include "vision/image_io.hpp"

struct progen_config {
  progen::pipeline::RunConfig config;
};

struct progen_generator {
  progen::pipeline::LoadedStage first;
  progen::pipeline::LoadedStage second;  // empty model for single-stage
};

namespace {

thread_local std::string g_last_error;

progen_status status_for(progen::ErrorKind kind) {
  using progen::ErrorKind;
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kContract:
      return PROGEN_ERR_USAGE;
    case ErrorKind::kData:
    case ErrorKind::kParse:
    case ErrorKind::kCorruption:
    case ErrorKind::kUnsupportedVersion:
    case ErrorKind::kIo:
      return PROGEN_ERR_DATA;
    case ErrorKind::kNumeric:
      return PROGEN_ERR_NUMERIC;
    default:
      return PROGEN_ERR_INTERNAL;
  }
}

template <typename F>
progen_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return PROGEN_OK;
  } catch (const progen::Error& e) {
    g_last_error = std::string(progen::error_kind_name(e.kind())) + ": " + e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return PROGEN_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw progen::ContractError(what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

progen::data::Split to_split(progen_split split) {
  switch (split) {
    case PROGEN_SPLIT_TRAIN:
      return progen::data::Split::kTrain;
    case PROGEN_SPLIT_VAL:
      return progen::data::Split::kVal;
    case PROGEN_SPLIT_TEST:
      return progen::data::Split::kTest;
  }
  throw progen::ContractError("unknown split");
}

class CallbackBuf : public std::stringbuf {
 public:
  CallbackBuf(progen_progress_fn fn, void* user) : fn_(fn), user_(user) {}

 protected:
  int sync() override {
    std::string text = str();
    std::size_t start = 0, nl;
    while ((nl = text.find('\n', start)) != std::string::npos) {
      fn_(text.substr(start, nl - start).c_str(), user_);
      start = nl + 1;
    }
    str(text.substr(start));
    return 0;
  }

 private:
  progen_progress_fn fn_;
  void* user_;
};

std::size_t env_threads() {
  const char* v = std::getenv("PROGEN_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (*end != '\0' || n == 0) throw progen::ConfigError(std::string("PROGEN_THREADS must be a positive integer, got '") + v + "'");
  return n;
}

}  // namespace

extern "C" {

const char* progen_version(void) { return "0.1.0"; }

const char* progen_last_error(void) { return g_last_error.c_str(); }

void progen_string_free(char* s) { std::free(s); }

progen_status progen_config_load(const char* path, progen_config** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    *out = nullptr;
    auto c = std::make_unique<progen_config>();
    c->config = path ? progen::pipeline::load_run_config(path)
                     : progen::pipeline::run_config_from_json(nlohmann::json::object(), ".");
    *out = c.release();
  });
}

void progen_config_free(progen_config* config) { delete config; }

progen_status progen_config_set_seed(progen_config* config, uint64_t seed) {
  return guarded([&] {
    require(config != nullptr, "config must not be NULL");
    config->config.training.seed = seed;
  });
}

progen_status progen_config_set_beam(progen_config* config, uint32_t beam) {
  return guarded([&] {
    require(config != nullptr, "config must not be NULL");
    if (beam == 0) throw progen::ConfigError("beam must be positive");
    config->config.decode.beam = beam;
  });
}

progen_status progen_config_to_json(const progen_config* config, char** out) {
  return guarded([&] {
    require(config != nullptr && out != nullptr, "config and out must not be NULL");
    *out = copy_string(config->config.to_json().dump(2));
  });
}

progen_status progen_synth(const char* dir, uint64_t seed, uint32_t n_train, uint32_t n_val, uint32_t n_test,
                           uint32_t grid) {
  return guarded([&] {
    require(dir != nullptr, "dir must not be NULL");
    const auto samples = progen::data::synth_corpus(seed, n_train, n_val, n_test, grid);
    progen::data::write_synth_corpus(dir, samples);
  });
}

progen_status progen_extract_concepts(const progen_config* config, const char* out_path) {
  return guarded([&] {
    require(config != nullptr, "config must not be NULL");
    progen::pipeline::extract_concepts(config->config, out_path ? std::filesystem::path(out_path) : std::filesystem::path());
  });
}

progen_status progen_train(const progen_config* config, progen_phase phase, progen_progress_fn progress, void* user) {
  return guarded([&] {
    require(config != nullptr, "config must not be NULL");
    progen::pipeline::Phase p;
    switch (phase) {
      case PROGEN_PHASE_ALL:
        p = progen::pipeline::Phase::kAll;
        break;
      case PROGEN_PHASE_VILM:
        p = progen::pipeline::Phase::kVilm;
        break;
      case PROGEN_PHASE_LM:
        p = progen::pipeline::Phase::kLm;
        break;
      case PROGEN_PHASE_BASELINE:
        p = progen::pipeline::Phase::kBaseline;
        break;
      default:
        throw progen::ContractError("unknown phase");
    }
    if (progress) {
      CallbackBuf buf(progress, user);
      std::ostream os(&buf);
      progen::pipeline::train(config->config, p, &os);
    } else {
      progen::pipeline::train(config->config, p, nullptr);
    }
  });
}

progen_status progen_generate(const progen_config* config, int single_stage, progen_split split,
                              const char* out_path) {
  return guarded([&] {
    require(config != nullptr, "config must not be NULL");
    const auto records = progen::pipeline::generate(config->config, single_stage != 0, to_split(split));
    std::filesystem::path out;
    if (out_path) {
      out = out_path;
    } else {
      out = config->config.paths.run_dir /
            (single_stage ? progen::pipeline::kGeneratedSingleFile : progen::pipeline::kGeneratedFile);
    }
    progen::pipeline::save_generated(out, records);
  });
}

progen_status progen_evaluate(const progen_config* config, const char* const* generated, size_t n,
                              const char* references, const char* lexicon, progen_split split, const char* out_path,
                              const char* diff_path, uint32_t threads, char** json_out) {
  return guarded([&] {
    require(generated != nullptr && n > 0, "at least one generated file is required");
    if (!config && (!references || !lexicon)) {
      throw progen::ConfigError("references and lexicon are required without a config");
    }
    const std::filesystem::path ref_path = references ? std::filesystem::path(references) : config->config.paths.annotations;
    const std::filesystem::path lex_path = lexicon ? std::filesystem::path(lexicon) : config->config.paths.lexicon;
    std::vector<std::vector<progen::pipeline::GeneratedRecord>> runs;
    for (size_t i = 0; i < n; ++i) {
      require(generated[i] != nullptr, "generated entries must not be NULL");
      std::filesystem::path p(generated[i]);
      if (std::filesystem::is_directory(p)) p /= progen::pipeline::kGeneratedFile;
      runs.push_back(progen::pipeline::load_generated(p));
    }
    const auto records = progen::data::load_annotations(ref_path);
    const auto lex = progen::pipeline::load_lexicon(lex_path);
    const std::size_t t = threads ? threads : env_threads();
    const auto e = progen::pipeline::evaluate(runs, records, to_split(split), lex, t, diff_path != nullptr);
    const std::string text = progen::pipeline::evaluation_to_json(e).dump(2) + "\n";
    if (out_path) progen::data::write_text_atomic(out_path, text);
    if (diff_path) progen::data::write_text_atomic(diff_path, e.diff);
    if (json_out) *json_out = copy_string(text);
  });
}

progen_status progen_generator_open(const char* vilm_ckpt, const char* lm_ckpt, progen_generator** out) {
  return guarded([&] {
    require(vilm_ckpt && lm_ckpt && out, "arguments must not be NULL");
    *out = nullptr;
    auto g = std::make_unique<progen_generator>();
    g->first = progen::pipeline::load_stage(vilm_ckpt);
    g->second = progen::pipeline::load_stage(lm_ckpt);
    if (g->first.model->config().kind != progen::models::Kind::kVisual ||
        g->second.model->config().kind != progen::models::Kind::kText) {
      throw progen::DataError("expected a visual first-stage and a text second-stage checkpoint");
    }
    if (!(g->second.source_vocab == g->first.target_vocab)) {
      throw progen::DataError("checkpoints disagree on the concept vocabulary");
    }
    *out = g.release();
  });
}

progen_status progen_generator_open_single(const char* ckpt, progen_generator** out) {
  return guarded([&] {
    require(ckpt && out, "arguments must not be NULL");
    *out = nullptr;
    auto g = std::make_unique<progen_generator>();
    g->first = progen::pipeline::load_stage(ckpt);
    if (g->first.model->config().kind != progen::models::Kind::kVisual) {
      throw progen::DataError("single-stage checkpoint must hold a visual model");
    }
    *out = g.release();
  });
}

void progen_generator_free(progen_generator* gen) { delete gen; }

progen_status progen_generator_run(const progen_generator* gen, const char* const* image_paths, size_t n_images,
                                   uint32_t beam, char** report_out, char** concepts_out, int* truncated_out) {
  return guarded([&] {
    require(gen && image_paths && report_out, "arguments must not be NULL");
    if (beam == 0) throw progen::ConfigError("beam must be positive");
    std::vector<progen::vision::Image> images;
    for (size_t i = 0; i < n_images; ++i) {
      require(image_paths[i] != nullptr, "image paths must not be NULL");
      images.push_back(progen::vision::read_image(image_paths[i]));
    }
    progen::decoding::DecodeConfig dc;
    dc.beam_size = beam;
    progen::models::GenerationResult r;
    if (gen->second.model) {
      r = progen::models::generate_progressive(*gen->first.model, *gen->second.model, gen->first.target_vocab,
                                               gen->second.target_vocab, images, dc);
    } else {
      r = progen::models::generate_single_stage(*gen->first.model, gen->first.target_vocab, images, dc);
    }
    char* report = copy_string(progen::data::join_tokens(r.report));
    if (concepts_out) {
      try {
        *concepts_out = copy_string(progen::data::join_tokens(r.concepts));
      } catch (...) {
        std::free(report);
        throw;
      }
    }
    *report_out = report;
    if (truncated_out) *truncated_out = r.truncated() ? 1 : 0;
  });
}

}  // extern "C"

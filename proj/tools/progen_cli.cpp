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

// progen command-line tool. Links only the C interface.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "progen/progen.h"

namespace {

int fail(progen_status status) {
  std::fprintf(stderr, "progen: %s\n", progen_last_error());
  return static_cast<int>(status);
}

struct ConfigHandle {
  progen_config* ptr = nullptr;
  ~ConfigHandle() { progen_config_free(ptr); }
};

progen_split split_from(const std::string& name) {
  if (name == "train") return PROGEN_SPLIT_TRAIN;
  if (name == "val") return PROGEN_SPLIT_VAL;
  return PROGEN_SPLIT_TEST;
}

void print_line(const char* line, void*) {
  std::fprintf(stderr, "%s\n", line);
  std::fflush(stderr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"progen: progressive image-to-report generation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", progen_version());

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  std::uint32_t beam = 0;
  bool single_stage = false;
  std::string split = "test";

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  std::uint32_t n_train = 800, n_val = 100, n_test = 100, grid = 4;
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--train", n_train, "training records");
  synth->add_option("--val", n_val, "validation records");
  synth->add_option("--test", n_test, "test records");
  synth->add_option("--grid", grid, "glyph grid cells per side (even)");

  auto* extract = app.add_subcommand("extract-concepts", "extract concept contexts from reports");
  extract->add_option("--config", config_path, "run config JSON")->required();
  extract->add_option("--out", out, "concepts file (default: configured path)");

  auto* train = app.add_subcommand("train", "train ViLM and LM (or the single-stage baseline)");
  std::string phase = "all";
  bool quiet = false;
  train->add_option("--config", config_path, "run config JSON")->required();
  auto* train_seed = train->add_option("--seed", seed, "override training.seed");
  train->add_option("--phase", phase, "all, vilm, lm or baseline")
      ->check(CLI::IsMember({"all", "vilm", "lm", "baseline"}));
  train->add_flag("--single-stage", single_stage, "train the single-stage baseline (same as --phase baseline)");
  train->add_flag("--quiet", quiet, "no per-epoch progress on stderr");

  auto* generate = app.add_subcommand("generate", "generate reports for a split");
  generate->add_option("--config", config_path, "run config JSON")->required();
  generate->add_option("--beam", beam, "beam size (1 = greedy)")->check(CLI::PositiveNumber);
  generate->add_flag("--single-stage", single_stage, "use the single-stage baseline");
  generate->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  generate->add_option("--out", out, "output JSON (default: run directory)");

  auto* evaluate = app.add_subcommand("evaluate", "score generated reports, averaging over runs");
  std::vector<std::string> generated;
  std::string references, lexicon, diff;
  std::uint32_t threads = 0;
  evaluate->add_option("--config", config_path, "run config JSON (references and lexicon paths)");
  evaluate->add_option("--generated", generated, "generated JSON files or run directories")->required();
  evaluate->add_option("--references", references, "annotation JSON");
  evaluate->add_option("--lexicon", lexicon, "lexicon JSON");
  evaluate->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  evaluate->add_option("--out", out, "metrics JSON (default: stdout)");
  evaluate->add_option("--diff", diff, "write aligned mention diff of the first run");
  evaluate->add_option("--threads", threads, "evaluation workers (default: PROGEN_THREADS or 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*synth) {
    const progen_status s = progen_synth(out.c_str(), seed, n_train, n_val, n_test, grid);
    return s == PROGEN_OK ? 0 : fail(s);
  }

  ConfigHandle config;
  if (!config_path.empty()) {
    const progen_status s = progen_config_load(config_path.c_str(), &config.ptr);
    if (s != PROGEN_OK) return fail(s);
  }

  if (*extract) {
    const progen_status s = progen_extract_concepts(config.ptr, out.empty() ? nullptr : out.c_str());
    return s == PROGEN_OK ? 0 : fail(s);
  }
  if (*train) {
    if (train_seed->count() > 0) progen_config_set_seed(config.ptr, seed);
    progen_phase p = PROGEN_PHASE_ALL;
    if (single_stage || phase == "baseline") {
      p = PROGEN_PHASE_BASELINE;
    } else if (phase == "vilm") {
      p = PROGEN_PHASE_VILM;
    } else if (phase == "lm") {
      p = PROGEN_PHASE_LM;
    }
    const progen_status s = progen_train(config.ptr, p, quiet ? nullptr : print_line, nullptr);
    return s == PROGEN_OK ? 0 : fail(s);
  }
  if (*generate) {
    if (beam > 0) {
      const progen_status s = progen_config_set_beam(config.ptr, beam);
      if (s != PROGEN_OK) return fail(s);
    }
    const progen_status s =
        progen_generate(config.ptr, single_stage ? 1 : 0, split_from(split), out.empty() ? nullptr : out.c_str());
    return s == PROGEN_OK ? 0 : fail(s);
  }
  if (*evaluate) {
    std::vector<const char*> files;
    for (const auto& g : generated) files.push_back(g.c_str());
    char* json = nullptr;
    const progen_status s = progen_evaluate(config.ptr, files.data(), files.size(),
                                            references.empty() ? nullptr : references.c_str(),
                                            lexicon.empty() ? nullptr : lexicon.c_str(), split_from(split),
                                            out.empty() ? nullptr : out.c_str(), diff.empty() ? nullptr : diff.c_str(),
                                            threads, out.empty() ? &json : nullptr);
    if (s != PROGEN_OK) return fail(s);
    if (json) {
      std::fputs(json, stdout);
      progen_string_free(json);
    }
    return 0;
  }
  return 1;
}

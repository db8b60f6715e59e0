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

#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "concepts/concepts.hpp"
#include "data/checkpoint.hpp"
#include "data/tokenizer.hpp"
#include "models/progressive.hpp"
#include "tensor/adam.hpp"
#include "util/error.hpp"
#include "vision/image_io.hpp"

namespace progen::pipeline {
namespace {

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage) {
  // splitmix64 finalizer over (seed, stage).
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stage + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}


std::vector<vision::Image> load_images(const RunConfig& config, const data::CorpusRecord& r) {
  if (r.image_paths.empty()) throw DataError("record " + r.id + " has no images");
  std::vector<vision::Image> images;
  for (const auto& p : r.image_paths) {
    const auto path = data::resolve_image(config.paths.data_dir, p);
    if (!std::filesystem::exists(path)) throw DataError("record " + r.id + ": missing image " + path.string());
    images.push_back(vision::read_image(path));
  }
  return images;
}

struct Corpus {
  std::vector<data::CorpusRecord> records;
  std::map<std::string, std::vector<std::string>> contexts;
  data::Vocab concept_vocab;
  data::Vocab report_vocab;
};

Corpus load_corpus(const RunConfig& config) {
  Corpus c;
  c.records = data::load_annotations(config.paths.annotations);
  if (!std::filesystem::exists(config.paths.concepts)) extract_concepts(config);
  for (auto& r : load_concepts(config.paths.concepts)) c.contexts[r.id] = std::move(r.context);
  for (const auto& r : c.records) {
    if (!c.contexts.count(r.id)) {
      throw DataError(config.paths.concepts.string() + ": no concepts for record " + r.id +
                      " (rerun extract-concepts)");
    }
  }
  std::vector<std::vector<std::string>> concept_corpus, report_corpus;
  for (const auto& r : data::records_in(c.records, data::Split::kTrain)) {
    concept_corpus.push_back(c.contexts.at(r.id));
    report_corpus.push_back(data::tokenize(r.report));
  }
  if (concept_corpus.empty()) throw DataError(config.paths.annotations.string() + ": train split is empty");
  if (config.training.shared_vocab) {
    auto both = concept_corpus;
    both.insert(both.end(), report_corpus.begin(), report_corpus.end());
    c.concept_vocab = c.report_vocab = data::Vocab::build(both, config.training.min_freq);
  } else {
    c.concept_vocab = data::Vocab::build(concept_corpus, config.training.min_freq);
    c.report_vocab = data::Vocab::build(report_corpus, config.training.min_freq);
  }
  return c;
}

struct StageData {
  std::vector<models::Example> train;
  std::vector<models::Example> val;
  std::vector<std::vector<std::string>> val_refs;
};

enum class StageKind { kVilm, kLm, kBaseline };

StageData stage_data(const RunConfig& config, const Corpus& corpus, StageKind kind) {
  StageData d;
  const std::size_t limit = kind == StageKind::kVilm ? config.model.max_concept_len : config.model.max_report_len;
  for (const auto& r : corpus.records) {
    if (r.split == data::Split::kTest) continue;
    models::Example ex;
    const auto& context = corpus.contexts.at(r.id);
    std::vector<std::string> target_tokens;
    if (kind == StageKind::kVilm) {
      target_tokens = context;
      ex.target = corpus.concept_vocab.encode(context);
    } else {
      target_tokens = data::tokenize(r.report);
      ex.target = corpus.report_vocab.encode(target_tokens);
    }
    if (ex.target.size() + 1 > limit) {
      throw DataError("record " + r.id + ": target of " + std::to_string(ex.target.size()) +
                      " tokens exceeds the configured maximum of " + std::to_string(limit) + " (EOS included)");
    }
    if (kind == StageKind::kLm) {
      ex.source = corpus.concept_vocab.encode(context);
    } else {
      ex.images = load_images(config, r);
    }
    if (r.split == data::Split::kTrain) {
      d.train.push_back(std::move(ex));
    } else {
      d.val.push_back(std::move(ex));
      d.val_refs.push_back(std::move(target_tokens));
    }
  }
  return d;
}

void check_finite(double loss, const std::string& stage, std::size_t epoch) {
  if (!std::isfinite(loss)) {
    throw NumericError(stage + ": non-finite training loss at epoch " + std::to_string(epoch));
  }
}

StageSummary train_stage(const RunConfig& config, models::Model& model, const StageData& data,
                         const data::Vocab& target_vocab, const std::string& stage, std::uint64_t seed,
                         const std::filesystem::path& log_path, std::ostream* progress) {
  const auto& opts = config.training;
  AdamOptions adam_options;
  adam_options.group_lr = {{kVisualGroup, opts.lr_visual}, {kOtherGroup, opts.lr_other}};
  AdamState adam(adam_options);
  Rng rng(seed);

  std::ostringstream log;
  StageSummary summary;
  summary.stage = stage;
  summary.best_val_bleu4 = -1.0;
  auto best = model.store().snapshot();
  std::size_t stale = 0;
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  decoding::DecodeConfig greedy;
  greedy.beam_size = 1;

  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t token_count = 0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      std::vector<models::Example> batch;
      std::size_t tokens = 0;
      for (std::size_t i = start; i < std::min(order.size(), start + opts.batch_size); ++i) {
        batch.push_back(data.train[order[i]]);
        tokens += batch.back().target.size() + 1;
      }
      Tape tape;
      TapeScope scope(tape);
      Tensor loss = model.batch_loss(batch, nn::RunMode::train(rng));
      check_finite(loss.item(), stage, epoch);
      tape.backward(loss);
      adam.update(model.store());
      loss_sum += loss.item() * static_cast<double>(tokens);
      token_count += tokens;
    }
    const double train_loss = loss_sum / static_cast<double>(token_count);
    summary.last_train_loss = train_loss;
    summary.epochs_run = epoch;
    log << nlohmann::json{{"epoch", epoch}, {"split", "train"}, {"loss", train_loss}, {"bleu4", nullptr}}.dump()
        << "\n";

    if (data.val.empty()) {
      best = model.store().snapshot();
      summary.best_epoch = epoch;
      continue;
    }
    double val_loss = 0.0;
    std::size_t val_tokens = 0;
    std::vector<metrics::Tokens> hyps;
    {
      NoGradScope no_grad;
      for (const auto& ex : data.val) {
        const std::size_t n = ex.target.size() + 1;
        val_loss += model.example_loss(ex, nn::RunMode::inference()).item() * static_cast<double>(n);
        val_tokens += n;
        hyps.push_back(target_vocab.decode(model.decode(ex, greedy).best.tokens));
      }
    }
    val_loss /= static_cast<double>(val_tokens);
    const double bleu4 = metrics::bleu(hyps, data.val_refs)[3];
    log << nlohmann::json{{"epoch", epoch}, {"split", "val"}, {"loss", val_loss}, {"bleu4", bleu4}}.dump() << "\n";
    if (progress) {
      *progress << stage << " epoch " << epoch << " train_loss " << train_loss << " val_loss " << val_loss
                << " val_bleu4 " << bleu4 << "\n";
      progress->flush();
    }
    if (bleu4 > summary.best_val_bleu4) {
      summary.best_val_bleu4 = bleu4;
      summary.best_epoch = epoch;
      best = model.store().snapshot();
      stale = 0;
    } else if (++stale >= opts.patience) {
      break;
    }
  }
  if (summary.best_val_bleu4 < 0.0) summary.best_val_bleu4 = 0.0;
  model.store().restore(best);
  data::write_text_atomic(log_path, log.str());
  return summary;
}

void save_stage(const std::filesystem::path& path, const models::Model& model, const std::string& stage,
                const data::Vocab* source, const data::Vocab& target, std::uint64_t seed, const StageSummary& s) {
  nlohmann::json meta = {{"stage", stage},
                         {"model", model.config().to_json()},
                         {"init_seed", seed},
                         {"target_vocab", target.to_json()},
                         {"best_epoch", s.best_epoch},
                         {"best_val_bleu4", s.best_val_bleu4}};
  if (source) meta["source_vocab"] = source->to_json();
  data::save_checkpoint(path, data::capture(model.store(), meta.dump()));
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::map<std::string, const data::CorpusRecord*> index_split(const std::vector<data::CorpusRecord>& records,
                                                              data::Split split) {
  std::map<std::string, const data::CorpusRecord*> out;
  for (const auto& r : records) {
    if (r.split == split) out[r.id] = &r;
  }
  return out;
}

std::string bracket(const std::vector<std::string>& tokens, const std::vector<std::uint8_t>& marked) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    const bool open = marked[i] && (i == 0 || !marked[i - 1]);
    const bool close = marked[i] && (i + 1 == tokens.size() || !marked[i + 1]);
    if (open) out += '[';
    out += tokens[i];
    if (close) out += ']';
  }
  return out;
}

}  // namespace

concepts::Lexicon load_lexicon(const std::filesystem::path& path) {
  if (!path.empty() && std::filesystem::exists(path)) return concepts::Lexicon::load(path);
  return concepts::default_lexicon();
}

std::vector<ConceptRecord> extract_concepts(const RunConfig& config, const std::filesystem::path& out) {
  const auto records = data::load_annotations(config.paths.annotations);
  const concepts::Lexicon lexicon = load_lexicon(config.paths.lexicon);
  const concepts::Extractor extractor(lexicon);
  std::vector<ConceptRecord> result;
  for (const auto& r : records) {
    ConceptRecord c;
    c.id = r.id;
    c.split = r.split;
    c.mentions = extractor.extract(r.report);
    c.context = concepts::build_context(c.mentions);
    result.push_back(std::move(c));
  }
  const auto path = out.empty() ? config.paths.concepts : out;
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  save_concepts(path, result);
  return result;
}

void save_concepts(const std::filesystem::path& path, const std::vector<ConceptRecord>& records) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json mentions = nlohmann::json::array();
    for (const auto& m : r.mentions) mentions.push_back(concepts::mention_to_json(m));
    j.push_back({{"id", r.id}, {"split", data::split_name(r.split)}, {"context_tokens", r.context},
                 {"mentions", mentions}});
  }
  data::write_text_atomic(path, j.dump(2) + "\n");
}

std::vector<ConceptRecord> load_concepts(const std::filesystem::path& path) {
  const auto j = data::read_json_file(path);
  if (!j.is_array()) throw DataError(path.string() + ": concepts file must be a JSON list");
  std::vector<ConceptRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    try {
      ConceptRecord r;
      r.id = e.at("id").get<std::string>();
      const auto split = e.value("split", std::string("train"));
      r.split = split == "val" ? data::Split::kVal : split == "test" ? data::Split::kTest : data::Split::kTrain;
      r.context = e.at("context_tokens").get<std::vector<std::string>>();
      concepts::parse_context(r.context);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(path.string() + ": record " + std::to_string(i) + ": " + ex.what());
    } catch (const ParseError& ex) {
      throw DataError(path.string() + ": record " + std::to_string(i) + ": " + ex.what());
    }
  }
  return out;
}

Phase parse_phase(const std::string& name) {
  if (name == "all") return Phase::kAll;
  if (name == "vilm") return Phase::kVilm;
  if (name == "lm") return Phase::kLm;
  if (name == "baseline") return Phase::kBaseline;
  throw ConfigError("unknown phase '" + name + "' (expected all, vilm, lm or baseline)");
}

std::vector<StageSummary> train(const RunConfig& config, Phase phase, std::ostream* progress) {
  const Corpus corpus = load_corpus(config);
  ensure_dir(config.paths.run_dir);
  const auto& dir = config.paths.run_dir;
  const std::uint64_t seed = config.training.seed;
  std::vector<StageSummary> out;

  if (phase == Phase::kAll || phase == Phase::kVilm) {
    const auto data = stage_data(config, corpus, StageKind::kVilm);
    const std::uint64_t init = stage_seed(seed, 0);
    models::Model vilm(config.vilm_config(), 0, corpus.concept_vocab.size(), init, "vilm");
    auto s = train_stage(config, vilm, data, corpus.concept_vocab, "vilm", stage_seed(seed, 10), dir / "vilm.log.jsonl",
                         progress);
    save_stage(dir / kVilmCheckpoint, vilm, "vilm", nullptr, corpus.concept_vocab, init, s);
    out.push_back(s);
  }
  if (phase == Phase::kAll || phase == Phase::kLm) {
    const auto data = stage_data(config, corpus, StageKind::kLm);
    const std::uint64_t init = stage_seed(seed, 1);
    models::Model lm(config.lm_config(), corpus.concept_vocab.size(), corpus.report_vocab.size(), init, "lm");
    auto s = train_stage(config, lm, data, corpus.report_vocab, "lm", stage_seed(seed, 11), dir / "lm.log.jsonl",
                         progress);
    save_stage(dir / kLmCheckpoint, lm, "lm", &corpus.concept_vocab, corpus.report_vocab, init, s);
    out.push_back(s);
  }
  if (phase == Phase::kBaseline) {
    const auto data = stage_data(config, corpus, StageKind::kBaseline);
    const std::uint64_t init = stage_seed(seed, 2);
    models::Model base(config.baseline_config(), 0, corpus.report_vocab.size(), init, "baseline");
    auto s = train_stage(config, base, data, corpus.report_vocab, "baseline", stage_seed(seed, 12),
                         dir / "baseline.log.jsonl", progress);
    save_stage(dir / kBaselineCheckpoint, base, "baseline", nullptr, corpus.report_vocab, init, s);
    out.push_back(s);
  }
  return out;
}

LoadedStage load_stage(const std::filesystem::path& path) {
  const auto ckpt = data::load_checkpoint(path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ckpt.config_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptionError(path.string() + ": checkpoint config is not JSON: " + e.what());
  }
  LoadedStage s;
  try {
    s.stage = meta.at("stage").get<std::string>();
    s.target_vocab = data::Vocab::from_json(meta.at("target_vocab"));
    if (meta.contains("source_vocab")) s.source_vocab = data::Vocab::from_json(meta.at("source_vocab"));
    const auto config = models::ModelConfig::from_json(meta.at("model"));
    const std::size_t source = config.kind == models::Kind::kText ? s.source_vocab.size() : 0;
    s.model = std::make_unique<models::Model>(config, source, s.target_vocab.size(),
                                              meta.at("init_seed").get<std::uint64_t>(), s.stage);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(path.string() + ": bad checkpoint metadata: " + e.what());
  }
  data::apply(ckpt, s.model->store());
  return s;
}

std::vector<GeneratedRecord> generate(const RunConfig& config, bool single_stage, data::Split split) {
  const auto records = data::load_annotations(config.paths.annotations);
  decoding::DecodeConfig dc;
  dc.beam_size = config.decode.beam;
  dc.alpha = config.decode.alpha;
  std::vector<GeneratedRecord> out;
  const auto& dir = config.paths.run_dir;
  if (single_stage) {
    const auto base = load_stage(dir / kBaselineCheckpoint);
    for (const auto& r : data::records_in(records, split)) {
      const auto images = load_images(config, r);
      const auto g = models::generate_single_stage(*base.model, base.target_vocab, images, dc);
      out.push_back({r.id, {}, data::join_tokens(g.report), g.truncated()});
    }
    return out;
  }
  const auto vilm = load_stage(dir / kVilmCheckpoint);
  const auto lm = load_stage(dir / kLmCheckpoint);
  if (!(lm.source_vocab == vilm.target_vocab)) {
    throw DataError("checkpoints disagree on the concept vocabulary; retrain both stages");
  }
  for (const auto& r : data::records_in(records, split)) {
    const auto images = load_images(config, r);
    const auto g = models::generate_progressive(*vilm.model, *lm.model, vilm.target_vocab, lm.target_vocab, images, dc);
    out.push_back({r.id, g.concepts, data::join_tokens(g.report), g.truncated()});
  }
  return out;
}

void save_generated(const std::filesystem::path& path, const std::vector<GeneratedRecord>& records) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : records) {
    j.push_back({{"id", r.id}, {"concepts", r.concepts}, {"report", r.report}, {"truncated", r.truncated}});
  }
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  data::write_text_atomic(path, j.dump(2) + "\n");
}

std::vector<GeneratedRecord> load_generated(const std::filesystem::path& path) {
  const auto j = data::read_json_file(path);
  if (!j.is_array()) throw DataError(path.string() + ": generated file must be a JSON list");
  std::vector<GeneratedRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      GeneratedRecord r;
      r.id = j[i].at("id").get<std::string>();
      r.report = j[i].at("report").get<std::string>();
      if (j[i].contains("concepts")) r.concepts = j[i].at("concepts").get<std::vector<std::string>>();
      r.truncated = j[i].value("truncated", false);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ": record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::string diff_pair(const std::string& id, const std::string& generated, const std::string& reference,
                      const concepts::Lexicon& lexicon) {
  const concepts::Extractor extractor(lexicon);
  const auto gen_tokens = data::tokenize(generated);
  const auto ref_tokens = data::tokenize(reference);
  const auto gen_mentions = extractor.extract(generated);
  const auto ref_mentions = extractor.extract(reference);
  auto key = [](const concepts::Mention& m) { return m.label + "/" + concepts::polarity_token(m.polarity); };
  std::set<std::string> gen_keys, ref_keys, shared;
  for (const auto& m : gen_mentions) gen_keys.insert(key(m));
  for (const auto& m : ref_mentions) ref_keys.insert(key(m));
  std::set_intersection(gen_keys.begin(), gen_keys.end(), ref_keys.begin(), ref_keys.end(),
                        std::inserter(shared, shared.begin()));
  auto marks = [&](const std::vector<concepts::Mention>& mentions, std::size_t n) {
    std::vector<std::uint8_t> marked(n, 0);
    for (const auto& m : mentions) {
      if (!shared.count(key(m))) continue;
      for (std::size_t i = m.begin; i < m.end && i < n; ++i) marked[i] = 1;
    }
    return marked;
  };
  std::ostringstream out;
  out << "== " << id << "\n";
  out << "gen: " << bracket(gen_tokens, marks(gen_mentions, gen_tokens.size())) << "\n";
  out << "ref: " << bracket(ref_tokens, marks(ref_mentions, ref_tokens.size())) << "\n";
  out << "shared:";
  for (const auto& k : shared) out << " " << k;
  out << "\n";
  return out.str();
}

Evaluation evaluate(const std::vector<std::vector<GeneratedRecord>>& runs, const std::vector<data::CorpusRecord>& records,
                    data::Split split, const concepts::Lexicon& lexicon, std::size_t threads, bool with_diff) {
  if (runs.empty()) throw ContractError("nothing to evaluate");
  const auto refs = index_split(records, split);
  Evaluation e;
  for (std::size_t run = 0; run < runs.size(); ++run) {
    std::map<std::string, const GeneratedRecord*> gen;
    for (const auto& g : runs[run]) {
      if (!gen.emplace(g.id, &g).second) throw DataError("run " + std::to_string(run) + ": duplicate id " + g.id);
    }
    std::vector<std::string> missing, extra;
    for (const auto& [id, r] : refs) {
      if (!gen.count(id)) missing.push_back(id);
    }
    for (const auto& [id, g] : gen) {
      if (!refs.count(id)) extra.push_back(id);
    }
    if (!missing.empty() || !extra.empty()) {
      std::ostringstream msg;
      msg << "run " << run << ": ids do not match the " << data::split_name(split) << " split";
      auto list = [&](const char* what, const std::vector<std::string>& ids) {
        if (ids.empty()) return;
        msg << "; " << what << " (" << ids.size() << "):";
        for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg << " " << ids[i];
        if (ids.size() > 20) msg << " ...";
      };
      list("missing from generated", missing);
      list("not in references", extra);
      throw DataError(msg.str());
    }
    std::vector<std::string> hyps, gold;
    for (const auto& [id, r] : refs) {
      hyps.push_back(gen.at(id)->report);
      gold.push_back(r->report);
      if (with_diff && run == 0) e.diff += diff_pair(id, hyps.back(), gold.back(), lexicon);
    }
    e.runs.push_back(metrics::evaluate(hyps, gold, lexicon, threads));
  }
  e.mean = metrics::average(e.runs);
  return e;
}

nlohmann::json evaluation_to_json(const Evaluation& e) {
  nlohmann::json j = e.mean.to_json();
  nlohmann::json per_run = nlohmann::json::array();
  for (const auto& r : e.runs) per_run.push_back(r.to_json());
  j["per_run"] = per_run;
  return j;
}

}  // namespace progen::pipeline

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

#include "data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "util/error.hpp"
#include "util/rng.hpp"

namespace progen::data {
namespace {

double quantize(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

bool glyph_pixel(std::size_t kind, std::size_t r, std::size_t c) {
  switch (kind) {
    case 0:  // hollow square
      return r >= 1 && r <= 6 && c >= 1 && c <= 6 && (r == 1 || r == 6 || c == 1 || c == 6);
    case 1:  // plus sign
      return ((r == 3 || r == 4) && c >= 1 && c <= 6) || ((c == 3 || c == 4) && r >= 1 && r <= 6);
    default: {  // filled disk
      const double dr = static_cast<double>(r) - 3.5, dc = static_cast<double>(c) - 3.5;
      return dr * dr + dc * dc <= 2.6 * 2.6;
    }
  }
}

SynthSample make_sample(Rng& rng, const std::string& id, Split split, std::size_t grid) {
  const std::size_t side = grid * kSynthCell;
  SynthSample s;
  s.record.id = id;
  s.record.split = split;
  s.record.image_paths = {"images/" + id + ".pgm"};
  s.image = vision::Image{side, side, std::vector<double>(side * side)};
  for (double& p : s.image.pixels) p = quantize(rng.uniform(0.0, 0.15));

  std::vector<std::size_t> kinds = {0, 1, 2};
  rng.shuffle(kinds);
  kinds.resize(rng.below(4));
  std::sort(kinds.begin(), kinds.end());
  std::vector<std::size_t> cells(grid * grid);
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
  rng.shuffle(cells);

  std::string report;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const std::size_t row = cells[k] / grid, col = cells[k] % grid;
    const double intensity = rng.uniform(0.8, 1.0);
    for (std::size_t r = 0; r < kSynthCell; ++r) {
      for (std::size_t c = 0; c < kSynthCell; ++c) {
        if (glyph_pixel(kinds[k], r, c)) {
          s.image.pixels[(row * kSynthCell + r) * side + col * kSynthCell + c] = quantize(intensity);
        }
      }
    }
    const std::string kind = kGlyphKinds[kinds[k]];
    const std::string quadrant = quadrant_name(row, col, grid);
    if (!report.empty()) report += " ";
    report += "there is a " + kind + " in the " + quadrant + " .";
    concepts::Mention m;
    m.label = kind;
    m.attributes = {quadrant};
    s.mentions.push_back(std::move(m));
  }
  if (kinds.empty()) {
    report = "no findings .";
  } else if (kinds.size() < 3) {
    std::size_t absent = 0;
    while (std::find(kinds.begin(), kinds.end(), absent) != kinds.end()) ++absent;
    report += std::string(" there is no ") + kGlyphKinds[absent] + " .";
    concepts::Mention m;
    m.label = kGlyphKinds[absent];
    m.polarity = concepts::Polarity::kNegative;
    s.mentions.push_back(std::move(m));
  }
  s.record.report = report;
  return s;
}

}  // namespace

std::string quadrant_name(std::size_t row, std::size_t col, std::size_t grid) {
  return std::string(row < grid / 2 ? "upper" : "lower") + "-" + (col < grid / 2 ? "left" : "right");
}

std::vector<SynthSample> synth_corpus(std::uint64_t seed, std::size_t n_train, std::size_t n_val,
                                      std::size_t n_test, std::size_t grid) {
  if (n_train == 0 || n_val == 0 || n_test == 0) throw ConfigError("synthetic split sizes must be at least 1");
  if (grid < 2 || grid % 2 != 0) throw ConfigError("synthetic grid must be an even number >= 2");
  Rng rng(seed);
  std::vector<SynthSample> out;
  const std::pair<Split, std::size_t> plan[] = {{Split::kTrain, n_train}, {Split::kVal, n_val}, {Split::kTest, n_test}};
  for (const auto& [split, n] : plan) {
    for (std::size_t i = 0; i < n; ++i) {
      char id[64];
      std::snprintf(id, sizeof(id), "synth-%s-%05zu", split_name(split), i);
      out.push_back(make_sample(rng, id, split, grid));
    }
  }
  return out;
}

void write_synth_corpus(const std::filesystem::path& dir, const std::vector<SynthSample>& samples) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  if (ec) throw IoError("cannot create " + (dir / "images").string() + ": " + ec.message());
  std::vector<CorpusRecord> records;
  for (const auto& s : samples) {
    vision::write_pgm(dir / s.record.image_paths[0], s.image);
    records.push_back(s.record);
  }
  save_annotations(dir / "annotation.json", records);
  write_text_atomic(dir / "lexicon.json", concepts::default_lexicon().to_json().dump(2) + "\n");
}

}  // namespace progen::data

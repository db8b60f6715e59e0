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

#ifndef PROGEN_DATA_SYNTH_HPP_
#define PROGEN_DATA_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "concepts/concepts.hpp"
#include "data/annotations.hpp"
#include "vision/image_io.hpp"

namespace progen::data {

inline constexpr std::size_t kSynthCell = 8;
inline constexpr const char* kGlyphKinds[] = {"square", "cross", "blob"};

struct SynthSample {
  CorpusRecord record;
  vision::Image image;
  std::vector<concepts::Mention> mentions;  // the generating concepts
};

// Deterministic in `seed`. Images are grid*8 pixels square with 0..3
// distinct glyph kinds on distinct cells; pixel values lie on the 1/255
// grid so that PGM storage is lossless.
std::vector<SynthSample> synth_corpus(std::uint64_t seed, std::size_t n_train, std::size_t n_val,
                                      std::size_t n_test, std::size_t grid = 4);

// Writes images/<id>.pgm, annotation.json and lexicon.json under `dir`.
void write_synth_corpus(const std::filesystem::path& dir, const std::vector<SynthSample>& samples);

// "upper-left" etc. for a cell of a grid.
std::string quadrant_name(std::size_t row, std::size_t col, std::size_t grid);

}  // namespace progen::data

#endif  // PROGEN_DATA_SYNTH_HPP_

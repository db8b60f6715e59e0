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

#ifndef PROGEN_DATA_ANNOTATIONS_HPP_
#define PROGEN_DATA_ANNOTATIONS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace progen::data {

enum class Split { kTrain, kVal, kTest };

const char* split_name(Split split);

struct CorpusRecord {
  std::string id;
  std::vector<std::string> image_paths;  // as written in the file
  std::string report;
  Split split = Split::kTrain;
};

// Parses {"train": [...], "val": [...], "test": [...]}, each record
// {id, image_path: [..], report}. Extra keys are ignored. Throws DataError
// naming the source, split, and record index.
std::vector<CorpusRecord> parse_annotations(const nlohmann::json& j, const std::string& source);
std::vector<CorpusRecord> load_annotations(const std::filesystem::path& path);
nlohmann::json annotations_to_json(const std::vector<CorpusRecord>& records);
void save_annotations(const std::filesystem::path& path, const std::vector<CorpusRecord>& records);

std::vector<CorpusRecord> records_in(const std::vector<CorpusRecord>& records, Split split);

// Relative image paths resolve against `root`.
std::filesystem::path resolve_image(const std::filesystem::path& root, const std::string& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace progen::data

#endif  // PROGEN_DATA_ANNOTATIONS_HPP_

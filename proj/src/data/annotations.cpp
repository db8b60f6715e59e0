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

#include "data/annotations.hpp"

#include <fstream>
#include <sstream>

#include "util/error.hpp"

namespace progen::data {

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

std::vector<CorpusRecord> parse_annotations(const nlohmann::json& j, const std::string& source) {
  if (!j.is_object()) throw DataError(source + ": annotation root must be an object");
  std::vector<CorpusRecord> out;
  for (Split split : {Split::kTrain, Split::kVal, Split::kTest}) {
    const char* name = split_name(split);
    if (!j.contains(name)) throw DataError(source + ": missing split '" + std::string(name) + "'");
    const auto& list = j.at(name);
    if (!list.is_array()) throw DataError(source + ": split '" + std::string(name) + "' is not a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& r = list[i];
      const std::string where = source + ": " + name + " record " + std::to_string(i);
      if (!r.is_object()) throw DataError(where + " is not an object");
      for (const char* key : {"id", "image_path", "report"}) {
        if (!r.contains(key)) throw DataError(where + " is missing '" + key + "'");
      }
      CorpusRecord rec;
      rec.split = split;
      if (r["id"].is_string()) {
        rec.id = r["id"].get<std::string>();
      } else if (r["id"].is_number_integer()) {
        rec.id = std::to_string(r["id"].get<long long>());
      } else {
        throw DataError(where + ": 'id' must be a string");
      }
      if (!r["report"].is_string()) throw DataError(where + ": 'report' must be a string");
      rec.report = r["report"].get<std::string>();
      const auto& paths = r["image_path"];
      if (paths.is_string()) {
        rec.image_paths.push_back(paths.get<std::string>());
      } else if (paths.is_array()) {
        for (const auto& p : paths) {
          if (!p.is_string()) throw DataError(where + ": image paths must be strings");
          rec.image_paths.push_back(p.get<std::string>());
        }
      } else {
        throw DataError(where + ": 'image_path' must be a list");
      }
      if (rec.image_paths.empty()) throw DataError(where + " has no images");
      out.push_back(std::move(rec));
    }
  }
  return out;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::vector<CorpusRecord> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_json_file(path), path.string());
}

nlohmann::json annotations_to_json(const std::vector<CorpusRecord>& records) {
  nlohmann::json j = {{"train", nlohmann::json::array()},
                      {"val", nlohmann::json::array()},
                      {"test", nlohmann::json::array()}};
  for (const auto& r : records) {
    j[split_name(r.split)].push_back(
        {{"id", r.id}, {"image_path", r.image_paths}, {"report", r.report}, {"split", split_name(r.split)}});
  }
  return j;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void save_annotations(const std::filesystem::path& path, const std::vector<CorpusRecord>& records) {
  write_text_atomic(path, annotations_to_json(records).dump(2) + "\n");
}

std::vector<CorpusRecord> records_in(const std::vector<CorpusRecord>& records, Split split) {
  std::vector<CorpusRecord> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

std::filesystem::path resolve_image(const std::filesystem::path& root, const std::string& path) {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : root / p;
}

}  // namespace progen::data

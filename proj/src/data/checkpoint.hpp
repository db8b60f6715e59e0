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

#ifndef PROGEN_DATA_CHECKPOINT_HPP_
#define PROGEN_DATA_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tensor/parameter_store.hpp"

namespace progen::data {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (little-endian):
//   "PGEN" | u32 version | u64 config length | config JSON bytes |
//   u32 parameter count | per parameter: u32 name length, name bytes,
//   u32 ndims, u64 dims..., f64 values... | u64 FNV-1a of all prior bytes
struct Checkpoint {
  struct Array {
    std::string name;
    Shape shape;
    std::vector<double> values;
  };
  std::string config_json;
  std::vector<Array> arrays;
};

std::uint64_t fnv1a64(const unsigned char* data, std::size_t size);

Checkpoint capture(const ParameterStore& store, std::string config_json);
// Copies arrays into the store. Throws CorruptionError when names or shapes
// disagree with the store.
void apply(const Checkpoint& ckpt, ParameterStore& store);

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt);
// Throws CorruptionError or UnsupportedVersionError; never returns a
// partially decoded checkpoint.
Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes, const std::string& source);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace progen::data

#endif  // PROGEN_DATA_CHECKPOINT_HPP_

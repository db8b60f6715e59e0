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

#include "data/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "util/error.hpp"

namespace progen::data {
namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    out.insert(out.end(), c, c + n);
  }
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  std::vector<unsigned char> out;
};

class Reader {
 public:
  Reader(const std::vector<unsigned char>& b, std::size_t end, const std::string& source)
      : b_(b), end_(end), source_(source) {}

  void need(std::size_t n) {
    if (end_ - pos_ < n) throw CorruptionError(source_ + ": checkpoint is truncated");
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return end_ - pos_; }

 private:
  const std::vector<unsigned char>& b_;
  std::size_t end_;
  std::size_t pos_ = 0;
  const std::string& source_;
};

}  // namespace

std::uint64_t fnv1a64(const unsigned char* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

Checkpoint capture(const ParameterStore& store, std::string config_json) {
  Checkpoint ckpt;
  ckpt.config_json = std::move(config_json);
  for (const auto& e : store.entries()) {
    ckpt.arrays.push_back({e.name, e.tensor.shape(), {e.tensor.data().begin(), e.tensor.data().end()}});
  }
  return ckpt;
}

void apply(const Checkpoint& ckpt, ParameterStore& store) {
  if (ckpt.arrays.size() != store.size()) {
    throw CorruptionError("checkpoint holds " + std::to_string(ckpt.arrays.size()) +
                          " arrays but the model has " + std::to_string(store.size()));
  }
  for (const auto& a : ckpt.arrays) {
    if (!store.contains(a.name)) throw CorruptionError("checkpoint array '" + a.name + "' is unknown to the model");
    Tensor t = store.get(a.name);
    if (t.shape() != a.shape) {
      throw CorruptionError("checkpoint array '" + a.name + "' has shape " + shape_str(a.shape) +
                            ", model expects " + shape_str(t.shape()));
    }
  }
  for (const auto& a : ckpt.arrays) {
    Tensor t = store.get(a.name);
    std::copy(a.values.begin(), a.values.end(), t.mutable_data().begin());
  }
}

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes("PGEN", 4);
  w.le<std::uint32_t>(kCheckpointVersion);
  w.le<std::uint64_t>(ckpt.config_json.size());
  w.bytes(ckpt.config_json.data(), ckpt.config_json.size());
  w.le<std::uint32_t>(static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& a : ckpt.arrays) {
    w.le<std::uint32_t>(static_cast<std::uint32_t>(a.name.size()));
    w.bytes(a.name.data(), a.name.size());
    w.le<std::uint32_t>(static_cast<std::uint32_t>(a.shape.size()));
    for (std::size_t d : a.shape) w.le<std::uint64_t>(d);
    for (double v : a.values) w.le<std::uint64_t>(std::bit_cast<std::uint64_t>(v));
  }
  w.le<std::uint64_t>(fnv1a64(w.out.data(), w.out.size()));
  return std::move(w.out);
}

Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes, const std::string& source) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "PGEN", 4) != 0) {
    throw CorruptionError(source + ": not a checkpoint (bad magic)");
  }
  {
    Reader header(bytes, bytes.size(), source);
    header.str(4);
    const auto version = header.le<std::uint32_t>();
    if (version != kCheckpointVersion) {
      throw UnsupportedVersionError(source + ": checkpoint version " + std::to_string(version) +
                                    " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
    }
  }
  if (bytes.size() < 16) throw CorruptionError(source + ": checkpoint is truncated");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored = 0;
  for (std::size_t i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(bytes[body + i]) << (8 * i);
  if (stored != fnv1a64(bytes.data(), body)) {
    throw CorruptionError(source + ": checkpoint checksum mismatch");
  }
  Reader r(bytes, body, source);
  r.str(4);
  r.le<std::uint32_t>();
  Checkpoint ckpt;
  const auto config_len = r.le<std::uint64_t>();
  if (config_len > r.remaining()) throw CorruptionError(source + ": config length exceeds file");
  ckpt.config_json = r.str(config_len);
  const auto count = r.le<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    Checkpoint::Array a;
    a.name = r.str(r.le<std::uint32_t>());
    const auto ndims = r.le<std::uint32_t>();
    if (ndims > 8) throw CorruptionError(source + ": implausible rank for '" + a.name + "'");
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < ndims; ++d) {
      const auto dim = r.le<std::uint64_t>();
      if (dim == 0 || dim > r.remaining()) throw CorruptionError(source + ": bad extent for '" + a.name + "'");
      a.shape.push_back(dim);
      n *= dim;
    }
    if (n > r.remaining() / 8) throw CorruptionError(source + ": array '" + a.name + "' exceeds file");
    a.values.resize(n);
    for (double& v : a.values) v = std::bit_cast<double>(r.le<std::uint64_t>());
    ckpt.arrays.push_back(std::move(a));
  }
  if (r.remaining() != 0) throw CorruptionError(source + ": trailing bytes after parameters");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes, path.string());
}

}  // namespace progen::data

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

#include "vision/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "util/error.hpp"

namespace progen::vision {
namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write image " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::uint32_t read_u32le(const std::vector<unsigned char>& b, std::size_t pos) {
  return static_cast<std::uint32_t>(b[pos]) | static_cast<std::uint32_t>(b[pos + 1]) << 8 |
         static_cast<std::uint32_t>(b[pos + 2]) << 16 | static_cast<std::uint32_t>(b[pos + 3]) << 24;
}

void put_u32le(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

// Reads one whitespace-delimited PGM header field, skipping comments.
std::size_t header_field(const std::vector<unsigned char>& b, std::size_t& pos,
                         const std::filesystem::path& path) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t value = 0, digits = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    value = value * 10 + (b[pos] - '0');
    if (++digits > 9) throw DataError("PGM header field too large in " + path.string());
    ++pos;
  }
  if (digits == 0) throw DataError("malformed PGM header in " + path.string());
  return value;
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  const auto b = read_bytes(path);
  if (b.size() < 2 || b[0] != 'P' || b[1] != '5') {
    throw DataError("not a binary PGM (P5) file: " + path.string());
  }
  std::size_t pos = 2;
  Image img;
  img.width = header_field(b, pos, path);
  img.height = header_field(b, pos, path);
  const std::size_t maxval = header_field(b, pos, path);
  if (img.width == 0 || img.height == 0 || maxval == 0 || maxval > 65535) {
    throw DataError("invalid PGM dimensions or maxval in " + path.string());
  }
  if (pos >= b.size() || !std::isspace(b[pos])) {
    throw DataError("missing separator after PGM header in " + path.string());
  }
  ++pos;
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  const std::size_t n = img.width * img.height;
  if (b.size() - pos < n * bytes_per) throw DataError("truncated PGM data in " + path.string());
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t v = bytes_per == 1 ? b[pos + i]
                                   : (static_cast<std::size_t>(b[pos + 2 * i]) << 8) | b[pos + 2 * i + 1];
    if (v > maxval) throw DataError("PGM sample exceeds maxval in " + path.string());
    img.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  for (double p : image.pixels) {
    bytes.push_back(static_cast<unsigned char>(std::lround(std::clamp(p, 0.0, 1.0) * 255.0)));
  }
  write_bytes(path, bytes);
}

Image read_imgf(const std::filesystem::path& path) {
  const auto b = read_bytes(path);
  if (b.size() < 8 || std::memcmp(b.data(), "IMGF", 4) != 0) {
    throw DataError("not an IMGF file: " + path.string());
  }
  const std::uint32_t ndims = read_u32le(b, 4);
  if (ndims != 2 && ndims != 3) {
    throw DataError("IMGF image must have 2 or 3 dims, found " + std::to_string(ndims) + " in " +
                    path.string());
  }
  if (b.size() < 8 + 4 * ndims) throw DataError("truncated IMGF header in " + path.string());
  std::vector<std::size_t> dims;
  for (std::uint32_t i = 0; i < ndims; ++i) dims.push_back(read_u32le(b, 8 + 4 * i));
  if (ndims == 3 && dims[0] != 1) throw DataError("IMGF image must be single-channel: " + path.string());
  Image img;
  img.height = dims[ndims - 2];
  img.width = dims[ndims - 1];
  const std::size_t n = img.height * img.width;
  const std::size_t data = 8 + 4 * ndims;
  if (n == 0 || b.size() != data + 4 * n) {
    throw DataError("IMGF payload size does not match its dims in " + path.string());
  }
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float f = std::bit_cast<float>(read_u32le(b, data + 4 * i));
    if (!std::isfinite(f)) throw DataError("non-finite IMGF sample in " + path.string());
    img.pixels[i] = static_cast<double>(f);
  }
  return img;
}

void write_imgf(const std::filesystem::path& path, const Image& image) {
  std::vector<unsigned char> bytes{'I', 'M', 'G', 'F'};
  put_u32le(bytes, 2);
  put_u32le(bytes, static_cast<std::uint32_t>(image.height));
  put_u32le(bytes, static_cast<std::uint32_t>(image.width));
  for (double p : image.pixels) put_u32le(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(p)));
  write_bytes(path, bytes);
}

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() >= 2 && magic[0] == 'P' && magic[1] == '5') return read_pgm(path);
  if (in.gcount() == 4 && std::memcmp(magic, "IMGF", 4) == 0) return read_imgf(path);
  throw DataError("unrecognised image format: " + path.string());
}

}  // namespace progen::vision

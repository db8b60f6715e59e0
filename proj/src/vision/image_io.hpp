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

#ifndef PROGEN_VISION_IMAGE_IO_HPP_
#define PROGEN_VISION_IMAGE_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <vector>

namespace progen::vision {

// Grayscale image with pixels in [0, 1], row-major.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

// Binary PGM (P5). 8-bit and 16-bit (big-endian) samples are both accepted and
// scaled by maxval. Throws IoError / DataError.
Image read_pgm(const std::filesystem::path& path);
// Writes 8-bit P5; pixels are clamped to [0, 1] and rounded to 1/255 steps.
void write_pgm(const std::filesystem::path& path, const Image& image);

// "IMGF" tensor file: magic, u32 ndims, u32 dims, then float32 LE samples.
// Two dims [H, W] or three [1, H, W].
Image read_imgf(const std::filesystem::path& path);
void write_imgf(const std::filesystem::path& path, const Image& image);

// Dispatches on the file magic.
Image read_image(const std::filesystem::path& path);

}  // namespace progen::vision

#endif  // PROGEN_VISION_IMAGE_IO_HPP_

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

#include <gtest/gtest.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>

#include "support/gradcheck.hpp"
#include "util/error.hpp"
#include "vision/backbone.hpp"
#include "tensor/adam.hpp"
#include "vision/image_io.hpp"

namespace progen::vision {
namespace {

namespace fs = std::filesystem;

Image random_image(std::size_t h, std::size_t w, Rng& rng) {
  Image img{h, w, std::vector<double>(h * w)};
  for (double& p : img.pixels) p = rng.uniform();
  return img;
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("progen_vision_" + name);
}

void write_raw(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

BackboneConfig small_config(std::size_t size, std::size_t patch) {
  BackboneConfig c;
  c.image_height = size;
  c.image_width = size;
  c.patch_size = patch;
  c.feature_dim = 12;
  return c;
}

TEST(Backbone, SingleViewPatchCount) {
  Rng rng(1);
  ParameterStore store;
  Backbone b(store, "vis", BackboneConfig{}, rng);
  NoGradScope no_grad;
  const Image img[] = {random_image(32, 32, rng)};
  Tensor f = b.forward(img);
  EXPECT_EQ(f.shape(), (Shape{16, 64}));
}

TEST(Backbone, TwoViewsConcatenate) {
  Rng rng(2);
  ParameterStore store;
  Backbone b(store, "vis", BackboneConfig{}, rng);
  NoGradScope no_grad;
  const Image views[] = {random_image(32, 32, rng), random_image(32, 32, rng)};
  Tensor both = b.forward(views);
  ASSERT_EQ(both.shape(), (Shape{32, 64}));
  Tensor first = b.forward_view(views[0]), second = b.forward_view(views[1]);
  for (std::size_t i = 0; i < first.numel(); ++i) {
    EXPECT_EQ(both[i], first[i]);
    EXPECT_EQ(both[first.numel() + i], second[i]);
  }
}

TEST(Backbone, ShapeSweep) {
  Rng rng(3);
  for (std::size_t patch : {4u, 8u}) {
    for (std::size_t views = 1; views <= 2; ++views) {
      ParameterStore store;
      BackboneConfig c = small_config(16, patch);
      Backbone b(store, "vis", c, rng);
      std::vector<Image> imgs;
      for (std::size_t v = 0; v < views; ++v) imgs.push_back(random_image(16, 16, rng));
      NoGradScope no_grad;
      Tensor f = b.forward(imgs);
      EXPECT_EQ(f.shape(), (Shape{(16 / patch) * (16 / patch) * views, 12}));
      for (double v : f.data()) EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(Backbone, ZeroImageGivesZeroFeatures) {
  Rng rng(4);
  ParameterStore store;
  Backbone b(store, "vis", BackboneConfig{}, rng);
  NoGradScope no_grad;
  const Image img[] = {Image{32, 32, std::vector<double>(32 * 32, 0.0)}};
  for (double v : b.forward(img).data()) EXPECT_EQ(v, 0.0);
}

TEST(Backbone, Errors) {
  Rng rng(5);
  ParameterStore store;
  EXPECT_THROW(Backbone(store, "a", small_config(30, 8), rng), ConfigError);
  EXPECT_THROW(Backbone(store, "b", small_config(24, 6), rng), ConfigError);
  Backbone b(store, "vis", BackboneConfig{}, rng);
  NoGradScope no_grad;
  std::vector<Image> three(3, random_image(32, 32, rng));
  EXPECT_THROW(b.forward(three), DataError);
  EXPECT_THROW(b.forward(std::span<const Image>{}), DataError);
  const Image wrong[] = {random_image(16, 16, rng)};
  EXPECT_THROW(b.forward(wrong), DataError);
  Image bright = random_image(32, 32, rng);
  bright.pixels[7] = 1.5;
  EXPECT_THROW(b.forward_view(bright), DataError);
}

TEST(Backbone, ParameterGroupPartitionsStore) {
  Rng rng(6);
  ParameterStore store;
  Backbone b(store, "vis", BackboneConfig{}, rng);
  nn::Linear other(store, "head", 4, 4, rng);
  auto visual = store.names_in_group(kVisualGroup);
  auto rest = store.names_in_group(kOtherGroup);
  EXPECT_FALSE(visual.empty());
  std::set<std::string> all(visual.begin(), visual.end());
  for (const auto& n : rest) EXPECT_TRUE(all.insert(n).second);
  EXPECT_EQ(all.size(), store.size());
  for (const auto& n : visual) EXPECT_EQ(n.rfind("vis.", 0), 0u);
  AdamOptions defaults;
  EXPECT_EQ(defaults.group_lr.at(kVisualGroup), 5e-5);
  EXPECT_EQ(defaults.group_lr.at(kOtherGroup), 1e-4);
}

TEST(Backbone, GradientsFlowThroughConvStack) {
  Rng rng(7);
  ParameterStore store;
  BackboneConfig c = small_config(8, 4);
  c.conv1_channels = 3;
  c.conv2_channels = 4;
  c.feature_dim = 5;
  Backbone b(store, "vis", c, rng);
  for (const auto& e : store.entries()) {
    Tensor t = e.tensor;
    for (double& v : t.mutable_data()) v = rng.uniform(-0.5, 0.5);
  }
  const Image img[] = {random_image(8, 8, rng)};
  std::vector<Tensor> params;
  for (const auto& e : store.entries()) params.push_back(e.tensor);
  auto f = [&](const std::vector<Tensor>&) { return b.forward(img); };
  EXPECT_LT(testing::max_gradient_error(f, params, rng), testing::kGradTolerance);
}

TEST(ImageIo, PgmRoundTripIsExactOnGrid) {
  Rng rng(8);
  Image img{5, 7, {}};
  for (std::size_t i = 0; i < 35; ++i) img.pixels.push_back(static_cast<double>(rng.below(256)) / 255.0);
  const fs::path p = temp_path("rt.pgm");
  write_pgm(p, img);
  Image back = read_image(p);
  EXPECT_EQ(back.height, 5u);
  EXPECT_EQ(back.width, 7u);
  EXPECT_EQ(back.pixels, img.pixels);
}

TEST(ImageIo, Pgm16BitAndComments) {
  const fs::path p = temp_path("wide.pgm");
  std::string bytes = "P5\n# comment line\n2 1\n65535\n";
  bytes += {'\xff', '\xff', '\x80', '\x00'};
  write_raw(p, bytes);
  Image img = read_pgm(p);
  ASSERT_EQ(img.pixels.size(), 2u);
  EXPECT_EQ(img.pixels[0], 1.0);
  EXPECT_EQ(img.pixels[1], 32768.0 / 65535.0);
}

TEST(ImageIo, ImgfIsBitExact) {
  const fs::path p = temp_path("x.imgf");
  std::string bytes = "IMGF";
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>(v >> (8 * i)));
  };
  u32(3);
  u32(1);
  u32(1);
  u32(2);
  const float a = 0.1f, b = 0.7f;
  u32(std::bit_cast<std::uint32_t>(a));
  u32(std::bit_cast<std::uint32_t>(b));
  write_raw(p, bytes);
  Image img = read_image(p);
  EXPECT_EQ(img.height, 1u);
  EXPECT_EQ(img.width, 2u);
  EXPECT_EQ(img.pixels[0], static_cast<double>(a));
  EXPECT_EQ(img.pixels[1], static_cast<double>(b));

  const fs::path q = temp_path("y.imgf");
  write_imgf(q, img);
  EXPECT_EQ(read_imgf(q).pixels, img.pixels);
}

TEST(ImageIo, MalformedFilesRejected) {
  EXPECT_THROW(read_image(temp_path("does_not_exist")), IoError);
  const fs::path p = temp_path("bad.pgm");
  write_raw(p, "P5\n4 4\n255\nab");
  EXPECT_THROW(read_pgm(p), DataError);
  write_raw(p, "P2\n1 1\n255\n0");
  EXPECT_THROW(read_image(p), DataError);
  write_raw(p, std::string("IMGF\x02\x00\x00\x00\x01\x00\x00\x00\x02\x00\x00\x00", 16));
  EXPECT_THROW(read_imgf(p), DataError);
}

}  // namespace
}  // namespace progen::vision

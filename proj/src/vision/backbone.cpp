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

#include "vision/backbone.hpp"

#include "util/error.hpp"

namespace progen::vision {
namespace {

Tensor conv_kernel(std::size_t out, std::size_t in, Rng& rng) {
  // Xavier over fan_in = in*9, fan_out = out*9.
  Tensor flat = nn::init_matrix(out, in * 9, nn::Init::kXavierUniform, rng);
  return Tensor({out, in, 3, 3}, {flat.data().begin(), flat.data().end()});
}

}  // namespace

void BackboneConfig::validate() const {
  if (image_height == 0 || image_width == 0 || feature_dim == 0 || conv1_channels == 0 ||
      conv2_channels == 0) {
    throw ConfigError("backbone sizes must be positive");
  }
  if (patch_size == 0 || patch_size % 4 != 0) {
    throw ConfigError("patch size " + std::to_string(patch_size) + " must be a positive multiple of 4");
  }
  if (image_height % patch_size != 0 || image_width % patch_size != 0) {
    throw ConfigError("image " + std::to_string(image_height) + "x" + std::to_string(image_width) +
                      " is not divisible by patch size " + std::to_string(patch_size));
  }
}

Backbone::Backbone(ParameterStore& store, const std::string& name, const BackboneConfig& config,
                   Rng& rng)
    : config_(config) {
  config_.validate();
  conv1_weight_ = store.add(name + ".conv1.weight", conv_kernel(config.conv1_channels, 1, rng), kVisualGroup);
  conv1_bias_ = store.add(name + ".conv1.bias", Tensor::zeros({config.conv1_channels}), kVisualGroup);
  conv2_weight_ = store.add(name + ".conv2.weight",
                            conv_kernel(config.conv2_channels, config.conv1_channels, rng), kVisualGroup);
  conv2_bias_ = store.add(name + ".conv2.bias", Tensor::zeros({config.conv2_channels}), kVisualGroup);
  const std::size_t q = config.patch_size / 4;
  projection_ = nn::Linear(store, name + ".projection", config.conv2_channels * q * q,
                           config.feature_dim, rng, kVisualGroup);
}

Tensor Backbone::forward_view(const Image& image) const {
  if (image.height != config_.image_height || image.width != config_.image_width) {
    throw DataError("image is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                    " but the backbone expects " + std::to_string(config_.image_height) + "x" +
                    std::to_string(config_.image_width));
  }
  if (image.pixels.size() != image.height * image.width) {
    throw DataError("image pixel count does not match its dimensions");
  }
  for (double p : image.pixels) {
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("image pixel " + std::to_string(p) + " is outside [0, 1]");
  }
  Tensor x({1, image.height, image.width}, image.pixels);
  x = max_pool2d(relu(conv2d(x, conv1_weight_, conv1_bias_)), 2);
  x = max_pool2d(relu(conv2d(x, conv2_weight_, conv2_bias_)), 2);
  return projection_.forward(patchify(x, config_.patch_size / 4));
}

Tensor Backbone::forward(std::span<const Image> images) const {
  if (images.empty() || images.size() > kMaxViews) {
    throw DataError("expected 1 or " + std::to_string(kMaxViews) + " images, got " +
                    std::to_string(images.size()));
  }
  if (images.size() == 1) return forward_view(images[0]);
  std::vector<Tensor> views;
  for (const Image& img : images) views.push_back(forward_view(img));
  return concat_rows(views);
}

}  // namespace progen::vision

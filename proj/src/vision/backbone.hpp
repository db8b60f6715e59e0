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

#ifndef PROGEN_VISION_BACKBONE_HPP_
#define PROGEN_VISION_BACKBONE_HPP_

#include <span>
#include <string>
#include <vector>

#include "nn/layers.hpp"
#include "vision/image_io.hpp"

namespace progen::vision {

inline constexpr std::size_t kMaxViews = 2;

struct BackboneConfig {
  std::size_t image_height = 32;
  std::size_t image_width = 32;
  std::size_t patch_size = 8;  // must be a multiple of 4 (two 2x2 pools)
  std::size_t feature_dim = 64;
  std::size_t conv1_channels = 8;
  std::size_t conv2_channels = 16;

  void validate() const;
  std::size_t patches_per_view() const {
    return (image_height / patch_size) * (image_width / patch_size);
  }
};

// Two conv3x3+ReLU+maxpool2 stages followed by a per-patch linear map.
// Every parameter lives in the "visual" group.
class Backbone {
 public:
  Backbone() = default;
  Backbone(ParameterStore& store, const std::string& name, const BackboneConfig& config, Rng& rng);

  // Features [S x feature_dim] with S = patches_per_view * images.size();
  // views are concatenated in order. Throws DataError for 0 or >2 images,
  // mismatched sizes, or pixels outside [0, 1].
  Tensor forward(std::span<const Image> images) const;
  Tensor forward_view(const Image& image) const;

  const BackboneConfig& config() const { return config_; }

 private:
  BackboneConfig config_;
  Tensor conv1_weight_, conv1_bias_, conv2_weight_, conv2_bias_;
  nn::Linear projection_;
};

}  // namespace progen::vision

#endif  // PROGEN_VISION_BACKBONE_HPP_

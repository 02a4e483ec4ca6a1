// Copyright 2026 The wearseg Authors. All Rights Reserved.
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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wearseg/image.hpp"
#include "wearseg/rng.hpp"

namespace wearseg {

/// Training-set augmentation settings. Value ranges are in the 8-bit domain.
struct AugmentSpec {
  double flip_probability = 0.5;
  std::array<double, 2> gamma_range{0.8, 1.2};
  std::array<double, 2> contrast_range{0.8, 1.2};
  std::array<double, 2> brightness_range{0.8, 1.2};
  /// Additive noise is a zero-mean Gaussian truncated to this interval.
  std::array<double, 2> noise_range{-50.0, 50.0};
  double noise_sigma = 50.0 / 3.0;
  std::size_t copies_per_image = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One concrete draw of the photometric and geometric parameters.
struct AugmentParams {
  bool flip = false;
  double gamma = 1.0;
  double contrast = 1.0;
  double brightness = 1.0;
  double noise_sigma = 0.0;  // 0 disables noise
  std::array<double, 2> noise_range{-50.0, 50.0};
};

AugmentParams sample_augment_params(const AugmentSpec& spec, Rng& rng);

GrayImage flip_horizontal(const GrayImage& image);
LabelMask flip_horizontal(const LabelMask& mask);

struct AugmentedPair {
  GrayImage image;
  LabelMask mask;
};

/// Fixed order: flip (image and mask) -> gamma -> mean-anchored contrast ->
/// brightness -> truncated Gaussian noise -> clamp and round to [0, 255].
/// Only the flip touches the mask.
AugmentedPair apply_augmentation(const GrayImage& image, const LabelMask& mask,
                                 const AugmentParams& params, Rng& noise_rng);

/// Samples parameters from `rng` and applies them.
AugmentedPair augment_pair(const GrayImage& image, const LabelMask& mask, const AugmentSpec& spec,
                           Rng& rng);

struct DatasetItem {
  std::string id;
  GrayImage image;
  LabelMask mask;
};

/// Originals followed by copies_per_image augmented variants of each item.
/// Each copy uses an RNG stream derived from (seed, item id, copy index), so
/// the output does not depend on iteration order.
std::vector<DatasetItem> expand_dataset(const std::vector<DatasetItem>& train,
                                        const AugmentSpec& spec);

std::string augmented_id(const std::string& id, std::size_t copy);

}  // namespace wearseg

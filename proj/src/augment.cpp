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

#include "wearseg/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>

#include "wearseg/parallel.hpp"

namespace wearseg {
namespace {

void check_range(const std::array<double, 2>& r, const char* name) {
  if (!(r[0] <= r[1])) throw ConfigError(std::string(name) + " range is not ordered");
}

std::uint64_t hash_id(std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : id) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

}  // namespace

void AugmentSpec::validate() const {
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0))
    throw ConfigError("flip probability must lie in [0, 1]");
  check_range(gamma_range, "gamma");
  check_range(contrast_range, "contrast");
  check_range(brightness_range, "brightness");
  check_range(noise_range, "noise");
  if (!(gamma_range[0] > 0.0)) throw ConfigError("gamma must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  if (noise_range[0] > 0.0 || noise_range[1] < 0.0)
    throw ConfigError("noise range must contain 0");
}

AugmentParams sample_augment_params(const AugmentSpec& spec, Rng& rng) {
  AugmentParams p;
  p.flip = rng.uniform() < spec.flip_probability;
  p.gamma = rng.uniform(spec.gamma_range[0], spec.gamma_range[1]);
  p.contrast = rng.uniform(spec.contrast_range[0], spec.contrast_range[1]);
  p.brightness = rng.uniform(spec.brightness_range[0], spec.brightness_range[1]);
  p.noise_sigma = spec.noise_sigma;
  p.noise_range = spec.noise_range;
  return p;
}

GrayImage flip_horizontal(const GrayImage& image) {
  GrayImage out = image;
  for (std::size_t y = 0; y < image.height; ++y)
    std::reverse(out.pixels.begin() + static_cast<long>(y * image.width),
                 out.pixels.begin() + static_cast<long>((y + 1) * image.width));
  return out;
}

LabelMask flip_horizontal(const LabelMask& mask) {
  LabelMask out = mask;
  for (std::size_t y = 0; y < mask.height; ++y)
    std::reverse(out.classes.begin() + static_cast<long>(y * mask.width),
                 out.classes.begin() + static_cast<long>((y + 1) * mask.width));
  return out;
}

AugmentedPair apply_augmentation(const GrayImage& image, const LabelMask& mask,
                                 const AugmentParams& params, Rng& noise_rng) {
  if (image.width != mask.width || image.height != mask.height)
    throw DataError("image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                    " and mask " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                    " are not aligned");
  AugmentedPair out{params.flip ? flip_horizontal(image) : image,
                    params.flip ? flip_horizontal(mask) : mask};

  std::vector<double> v(out.image.pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = 255.0 * std::pow(out.image.pixels[i] / 255.0, params.gamma);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(std::max<std::size_t>(1, v.size()));
  for (double& x : v) x = params.brightness * (mean + params.contrast * (x - mean));
  if (params.noise_sigma > 0.0) {
    for (double& x : v) {
      double n;
      do {
        n = noise_rng.normal(0.0, params.noise_sigma);
      } while (n < params.noise_range[0] || n > params.noise_range[1]);
      x += n;
    }
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    out.image.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v[i], 0.0, 255.0)));
  return out;
}

AugmentedPair augment_pair(const GrayImage& image, const LabelMask& mask, const AugmentSpec& spec,
                           Rng& rng) {
  spec.validate();
  const auto params = sample_augment_params(spec, rng);
  return apply_augmentation(image, mask, params, rng);
}

std::string augmented_id(const std::string& id, std::size_t copy) {
  return id + "_aug" + std::to_string(copy);
}

std::vector<DatasetItem> expand_dataset(const std::vector<DatasetItem>& train,
                                        const AugmentSpec& spec) {
  spec.validate();
  const std::size_t copies = spec.copies_per_image;
  std::vector<DatasetItem> out(train.size() * (1 + copies));
  std::copy(train.begin(), train.end(), out.begin());
  parallel_for(train.size() * copies, [&](std::size_t job) {
    const auto& item = train[job / copies];
    const std::size_t copy = job % copies + 1;
    Rng rng(derive_seed({spec.seed, hash_id(item.id), copy}));
    auto aug = augment_pair(item.image, item.mask, spec, rng);
    out[train.size() + job] = {augmented_id(item.id, copy), std::move(aug.image), std::move(aug.mask)};
  });
  return out;
}

}  // namespace wearseg

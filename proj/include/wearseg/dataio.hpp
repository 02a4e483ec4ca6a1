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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wearseg/image.hpp"
#include "wearseg/tensor.hpp"

namespace wearseg {

using Rgb = std::array<std::uint8_t, 3>;

struct PaletteEntry {
  std::string name;
  Rgb color{};
};

/// Bijection between wear class indices and mask colors.
class ClassPalette {
 public:
  /// background/black, unworn/green, contamination/red, grooves/blue,
  /// surface_spalling/yellow, adhesive_wear/violet.
  static ClassPalette standard();
  /// Text format, one class per line: "index name R G B". '#' starts a comment.
  static ClassPalette parse(const std::string& text);
  static ClassPalette load(const std::filesystem::path& path);
  std::string to_text() const;

  explicit ClassPalette(std::array<PaletteEntry, kNumClasses> entries);

  const PaletteEntry& entry(std::size_t cls) const { return entries_.at(cls); }
  std::optional<std::uint8_t> lookup(const Rgb& color) const;

 private:
  std::array<PaletteEntry, kNumClasses> entries_;
};

/// DataError naming the first pixel whose color is not in the palette.
LabelMask decode_mask(const RgbImage& rgb, const ClassPalette& palette);
RgbImage encode_mask(const LabelMask& mask, const ClassPalette& palette);

// ---------------------------------------------------------------------------
// Raster file formats

/// 8-bit grayscale PNG or binary PGM (P5, maxval 255). Other bit depths or
/// color types are a DataError.
GrayImage read_gray_image(const std::filesystem::path& path);
void write_gray_png(const GrayImage& image, const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);
/// 8-bit RGB PNG (an alpha channel, if present, is rejected).
RgbImage read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);

enum class ExtentPolicy {
  kKeep,             // no change; callers must supply valid extents
  kPadToMultiple,    // centered edge-replication padding
  kCropToMultiple,   // centered crop
};

/// Where the original image sits inside the adjusted one.
struct CropInfo {
  std::size_t original_width = 0;
  std::size_t original_height = 0;
  // Adjusted pixel (ax, ay) maps to original (ax - offset + source).
  std::size_t offset_x = 0;  // padding before the original, per axis
  std::size_t offset_y = 0;
  std::size_t source_x = 0;  // cropped-away margin of the original, per axis
  std::size_t source_y = 0;
};

struct AdjustedImage {
  GrayImage image;
  CropInfo crop;
};

AdjustedImage adjust_extents(const GrayImage& image, ExtentPolicy policy, std::size_t multiple = 16);

/// Restores a mask predicted on an adjusted image to the original frame.
/// Pixels that were cropped away are filled with `fill`.
LabelMask restore_mask(const LabelMask& mask, const CropInfo& crop,
                       std::uint8_t fill = class_index(WearClass::kBackground));

/// Same extent change applied to a label mask (edge replication / crop).
LabelMask adjust_mask(const LabelMask& mask, const CropInfo& crop, std::size_t width,
                      std::size_t height);

struct LoadedImage {
  Tensor tensor;  // 1 x 1 x H x W in [0, 1]
  CropInfo crop;
};

LoadedImage load_image(const std::filesystem::path& path,
                       ExtentPolicy policy = ExtentPolicy::kKeep, std::size_t multiple = 16);

/// Stacks equally sized images into an N x 1 x H x W tensor scaled by 1/255.
Tensor images_to_tensor(std::span<const GrayImage* const> images);
Tensor image_to_tensor(const GrayImage& image);

// ---------------------------------------------------------------------------
// Dataset splits

enum class Subset { kTrain, kValidation, kTest };
const char* subset_name(Subset s);
Subset parse_subset(const std::string& name);

enum class SplitStrategy { kEquidistant, kRandom };
SplitStrategy parse_split_strategy(const std::string& name);

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::array<double, 3> fractions{0.6, 0.2, 0.2};
  std::uint64_t seed = 0;

  const std::vector<std::string>& subset(Subset s) const;
  std::size_t size() const { return train.size() + validation.size() + test.size(); }
};

/// Partitions ordered ids. Validation and test sizes are floor(f * n); train
/// takes the remainder. "equidistant" draws validation+test ids at evenly
/// spaced positions of the ordered list and then assigns them to the two
/// held-out subsets at random; "random" shuffles all ids first.
DatasetSplit split_dataset(std::span<const std::string> ids,
                           std::array<double, 3> fractions = {0.6, 0.2, 0.2},
                           std::uint64_t seed = 0,
                           SplitStrategy strategy = SplitStrategy::kEquidistant);

/// "id<TAB>subset" lines, ordered train, validation, test.
void write_split_manifest(const DatasetSplit& split, const std::filesystem::path& path);
DatasetSplit read_split_manifest(const std::filesystem::path& path);

}  // namespace wearseg

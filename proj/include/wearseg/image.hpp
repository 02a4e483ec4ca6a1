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
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wearseg/error.hpp"

namespace wearseg {

inline constexpr std::size_t kNumClasses = 6;

enum class WearClass : std::uint8_t {
  kBackground = 0,
  kUnworn = 1,
  kContamination = 2,
  kGrooves = 3,
  kSurfaceSpalling = 4,
  kAdhesiveWear = 5,
};

constexpr std::uint8_t class_index(WearClass c) { return static_cast<std::uint8_t>(c); }

/// Row-major single-plane 8-bit raster.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(w * h, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  bool operator==(const GrayImage&) const = default;
};

/// Interleaved 8-bit RGB.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(3 * w * h, 0) {}
  bool operator==(const RgbImage&) const = default;
};

/// Per-pixel wear class indices, every value < kNumClasses.
struct LabelMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> classes;

  LabelMask() = default;
  LabelMask(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), classes(w * h, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y) { return classes[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return classes[y * width + x]; }
  std::size_t size() const { return classes.size(); }
  bool operator==(const LabelMask&) const = default;

  /// DataError on any out-of-range class or size inconsistency.
  void validate() const {
    if (classes.size() != width * height)
      throw DataError("label mask storage does not match " + std::to_string(width) + "x" +
                      std::to_string(height));
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i] >= kNumClasses)
        throw DataError("label mask class " + std::to_string(classes[i]) + " at (" +
                        std::to_string(i % width) + "," + std::to_string(i / width) +
                        ") is not a wear class");
  }

  std::array<std::size_t, kNumClasses> class_counts() const {
    std::array<std::size_t, kNumClasses> counts{};
    for (auto c : classes) ++counts.at(c);
    return counts;
  }
};

}  // namespace wearseg

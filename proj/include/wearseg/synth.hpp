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
#include <functional>
#include <vector>

#include "wearseg/image.hpp"

// Procedural punch-surface images with exact ground truth. The punch is drawn
// as horizontal bands, top to bottom: background, unworn surface, surface
// spalling (with adhesive-wear dots), grooves, contamination.
namespace wearseg::synth {

enum Band : std::size_t {
  kBackgroundBand = 0,
  kUnwornBand,
  kSpallingBand,
  kGroovesBand,
  kContaminationBand,
  kBandCount,
};

struct SyntheticSpec {
  std::size_t width = 64;   // multiple of 16
  std::size_t height = 64;  // multiple of 16
  std::array<double, kBandCount> band_fractions{0.12, 0.22, 0.32, 0.20, 0.14};
  /// Random shift of each interior band boundary, in pixels (+/-).
  std::size_t band_jitter = 3;

  double wear_level = 0.5;          // t in [0, 1]
  double max_dot_density = 0.01;    // adhesive dots per spalling pixel at t = 1
  double dot_radius_min = 1.5;      // ellipse semi-axes, pixels
  double dot_radius_max = 3.5;
  double adhesive_gray = 45.0;

  std::size_t groove_count = 7;
  double groove_amplitude = 1.5;    // stripe wobble, pixels
  double groove_darkness = 70.0;    // gray drop at stripe center

  std::size_t contamination_blobs = 4;

  /// Base gray level per band, same order as Band.
  std::array<double, kBandCount> gray_levels{25.0, 190.0, 140.0, 165.0, 100.0};
  double noise_sigma = 6.0;
  std::uint64_t seed = 0;

  double dot_density() const { return wear_level * max_dot_density; }
  /// ConfigError on invalid ranges, fractions not summing to 1, extents not
  /// divisible by 16, or a present band thinner than 4 px.
  void validate() const;
};

struct Sample {
  GrayImage image;
  LabelMask mask;
};

/// Axis-aligned adhesive-wear ellipse.
struct Dot {
  double cx, cy, rx, ry;
};

/// First row of each band plus the final row (kBandCount + 1 entries).
using BandRows = std::array<std::size_t, kBandCount + 1>;

BandRows band_rows(const SyntheticSpec& spec, std::uint64_t layout_seed);

/// Dots drawn for the spec's wear level: Poisson(density * band area)
/// ellipses fully inside the spalling band.
std::vector<Dot> sample_dots(const SyntheticSpec& spec, const BandRows& rows, double density,
                             std::uint64_t dot_seed);

/// Renders a frame from an explicit layout and dot list.
Sample render(const SyntheticSpec& spec, const BandRows& rows, const std::vector<Dot>& dots,
              std::uint64_t texture_seed, std::uint64_t noise_seed);

/// One image/mask pair, fully determined by the spec (including its seed).
Sample generate(const SyntheticSpec& spec);

/// Wear-progression timeline. Adhesion accumulates as a saturating
/// exponential of strokes since the last cleaning stop and resets to zero at
/// each stop.
struct SequenceSpec {
  std::size_t num_frames = 200;
  std::uint64_t first_stroke = 0;
  std::uint64_t stroke_step = 500;
  double wear_tau = 15000.0;  // strokes
  std::vector<std::uint64_t> cleaning_strokes;

  void validate() const;
  std::vector<std::uint64_t> strokes() const;
  /// Wear level t in [0, 1) at a stroke index.
  double wear_at(std::uint64_t stroke) const;
};

struct Frame {
  std::uint64_t stroke = 0;
  double wear_level = 0.0;
  Sample sample;
};

/// Streams frames in stroke order. Between cleaning stops the visible dot set
/// only grows, so the class-5 pixel count is non-decreasing there.
void generate_sequence(const SequenceSpec& seq, const SyntheticSpec& spec,
                       const std::function<void(const Frame&)>& sink);
std::vector<Frame> generate_sequence(const SequenceSpec& seq, const SyntheticSpec& spec);

}  // namespace wearseg::synth

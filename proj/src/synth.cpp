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

#include "wearseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wearseg/rng.hpp"

namespace wearseg::synth {
namespace {

constexpr std::size_t kMinBandRows = 4;

constexpr std::array<WearClass, kBandCount> kBandClass{
    WearClass::kBackground, WearClass::kUnworn, WearClass::kSurfaceSpalling,
    WearClass::kGrooves, WearClass::kContamination};

enum SeedTag : std::uint64_t { kLayout = 1, kDots = 2, kTexture = 3, kNoise = 4 };

BandRows nominal_rows(const SyntheticSpec& spec) {
  BandRows rows{};
  double cum = 0.0;
  for (std::size_t b = 0; b < kBandCount; ++b) {
    rows[b] = static_cast<std::size_t>(std::lround(cum * static_cast<double>(spec.height)));
    cum += spec.band_fractions[b];
  }
  rows[kBandCount] = spec.height;
  return rows;
}

bool rows_ok(const BandRows& rows, const BandRows& nominal) {
  for (std::size_t b = 0; b < kBandCount; ++b) {
    if (rows[b + 1] < rows[b]) return false;
    const bool present = nominal[b + 1] > nominal[b];
    const std::size_t size = rows[b + 1] - rows[b];
    if (present != (size > 0)) return false;
    if (present && size < kMinBandRows) return false;
  }
  return true;
}

double gauss_bump(double dx, double dy, double sigma) {
  return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
}

}  // namespace

void SyntheticSpec::validate() const {
  if (width == 0 || height == 0 || width % 16 != 0 || height % 16 != 0)
    throw ConfigError("synthetic image extents " + std::to_string(width) + "x" +
                      std::to_string(height) + " must be positive multiples of 16");
  double sum = 0.0;
  for (double f : band_fractions) {
    if (!(f >= 0.0)) throw ConfigError("band fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("band fractions must sum to 1");
  if (!(wear_level >= 0.0 && wear_level <= 1.0)) throw ConfigError("wear level must lie in [0, 1]");
  if (!(max_dot_density >= 0.0)) throw ConfigError("dot density must be non-negative");
  if (!(dot_radius_min > 0.0) || dot_radius_max < dot_radius_min)
    throw ConfigError("dot radius range must satisfy 0 < min <= max");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  for (double g : gray_levels)
    if (!(g >= 0.0 && g <= 255.0)) throw ConfigError("gray levels must lie in [0, 255]");
  if (!(adhesive_gray >= 0.0 && adhesive_gray <= 255.0))
    throw ConfigError("adhesive gray level must lie in [0, 255]");
  const auto rows = nominal_rows(*this);
  static const char* names[] = {"background", "unworn", "surface spalling", "grooves",
                                "contamination"};
  for (std::size_t b = 0; b < kBandCount; ++b) {
    const std::size_t size = rows[b + 1] - rows[b];
    if (band_fractions[b] > 0.0 && size < kMinBandRows)
      throw ConfigError(std::string(names[b]) + " band is " + std::to_string(size) +
                        " px tall; at least " + std::to_string(kMinBandRows) +
                        " px are needed to render its texture");
  }
}

BandRows band_rows(const SyntheticSpec& spec, std::uint64_t layout_seed) {
  spec.validate();
  const BandRows nominal = nominal_rows(spec);
  if (spec.band_jitter == 0) return nominal;
  Rng rng(layout_seed);
  BandRows rows = nominal;
  const auto j = static_cast<long>(spec.band_jitter);
  for (std::size_t b = 1; b < kBandCount; ++b) {
    // Boundaries that coincide (absent bands) move together.
    if (nominal[b] == nominal[b - 1] && b > 1) {
      rows[b] = rows[b - 1];
      continue;
    }
    const long shift = static_cast<long>(rng.uniform_int(2 * j + 1)) - j;
    rows[b] = static_cast<std::size_t>(
        std::clamp<long>(static_cast<long>(nominal[b]) + shift, 0, static_cast<long>(spec.height)));
  }
  return rows_ok(rows, nominal) ? rows : nominal;
}

std::vector<Dot> sample_dots(const SyntheticSpec& spec, const BandRows& rows, double density,
                             std::uint64_t dot_seed) {
  const std::size_t y0 = rows[kSpallingBand], y1 = rows[kSpallingBand + 1];
  std::vector<Dot> dots;
  if (y1 <= y0 || density <= 0.0) return dots;
  Rng rng(dot_seed);
  const double area = static_cast<double>(spec.width * (y1 - y0));
  const auto count = rng.poisson(density * area);
  const double w = static_cast<double>(spec.width);
  for (std::uint64_t i = 0; i < count; ++i) {
    Dot d{};
    d.rx = rng.uniform(spec.dot_radius_min, spec.dot_radius_max);
    d.ry = rng.uniform(spec.dot_radius_min, spec.dot_radius_max);
    d.cx = 2.0 * d.rx < w ? rng.uniform(d.rx, w - d.rx) : w / 2.0;
    const double lo = static_cast<double>(y0) + d.ry, hi = static_cast<double>(y1) - d.ry;
    d.cy = lo < hi ? rng.uniform(lo, hi) : 0.5 * static_cast<double>(y0 + y1);
    dots.push_back(d);
  }
  return dots;
}

Sample render(const SyntheticSpec& spec, const BandRows& rows, const std::vector<Dot>& dots,
              std::uint64_t texture_seed, std::uint64_t noise_seed) {
  const std::size_t w = spec.width, h = spec.height;
  std::vector<double> value(w * h, 0.0);
  LabelMask mask(w, h);
  Rng tex(texture_seed);
  const double wd = static_cast<double>(w);

  for (std::size_t b = 0; b < kBandCount; ++b) {
    const std::size_t y0 = rows[b], y1 = rows[b + 1];
    if (y1 <= y0) continue;
    const double base = spec.gray_levels[b];
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        value[y * w + x] = base;
        mask.at(x, y) = class_index(kBandClass[b]);
      }

    switch (b) {
      case kBackgroundBand:
        break;
      case kUnwornBand:
        // Cylindrical shading across the punch.
        for (std::size_t y = y0; y < y1; ++y)
          for (std::size_t x = 0; x < w; ++x) {
            const double u = 2.0 * (static_cast<double>(x) + 0.5) / wd - 1.0;
            value[y * w + x] -= 18.0 * u * u;
          }
        break;
      case kSpallingBand: {
        const int bumps = 10 + static_cast<int>(tex.uniform_int(6));
        for (int k = 0; k < bumps; ++k) {
          const double cx = tex.uniform(0.0, wd);
          const double cy = tex.uniform(static_cast<double>(y0), static_cast<double>(y1));
          const double sigma = tex.uniform(2.0, 5.0);
          const double amp = tex.uniform(-20.0, 20.0);
          for (std::size_t y = y0; y < y1; ++y)
            for (std::size_t x = 0; x < w; ++x)
              value[y * w + x] += amp * gauss_bump(x + 0.5 - cx, y + 0.5 - cy, sigma);
        }
        break;
      }
      case kGroovesBand: {
        for (std::size_t k = 0; k < spec.groove_count; ++k) {
          const double x0 = (static_cast<double>(k) + tex.uniform(0.25, 0.75)) * wd /
                            static_cast<double>(spec.groove_count);
          const double period = tex.uniform(12.0, 30.0);
          const double phase = tex.uniform(0.0, 2.0 * std::numbers::pi);
          const double width = tex.uniform(0.6, 1.2);
          for (std::size_t y = y0; y < y1; ++y) {
            const double center =
                x0 + spec.groove_amplitude * std::sin(2.0 * std::numbers::pi * y / period + phase);
            for (std::size_t x = 0; x < w; ++x) {
              const double dx = x + 0.5 - center;
              value[y * w + x] -= spec.groove_darkness * std::exp(-dx * dx / (2.0 * width * width));
            }
          }
        }
        break;
      }
      case kContaminationBand: {
        for (std::size_t k = 0; k < spec.contamination_blobs; ++k) {
          const double cx = tex.uniform(0.0, wd);
          const double cy = tex.uniform(static_cast<double>(y0), static_cast<double>(y1));
          const double sigma = tex.uniform(2.5, 6.0);
          const double amp = tex.uniform(0.0, 1.0) < 0.5 ? tex.uniform(-55.0, -30.0)
                                                         : tex.uniform(30.0, 55.0);
          for (std::size_t y = y0; y < y1; ++y)
            for (std::size_t x = 0; x < w; ++x)
              value[y * w + x] += amp * gauss_bump(x + 0.5 - cx, y + 0.5 - cy, sigma);
        }
        // Residue speckle.
        for (std::size_t y = y0; y < y1; ++y)
          for (std::size_t x = 0; x < w; ++x) value[y * w + x] += tex.normal(0.0, 12.0);
        break;
      }
      default:
        break;
    }
  }

  // Adhesive wear overrides surface spalling only.
  for (const Dot& d : dots) {
    const auto xa = static_cast<long>(std::floor(d.cx - d.rx)), xb = static_cast<long>(std::ceil(d.cx + d.rx));
    const auto ya = static_cast<long>(std::floor(d.cy - d.ry)), yb = static_cast<long>(std::ceil(d.cy + d.ry));
    for (long y = std::max(0L, ya); y <= std::min<long>(yb, static_cast<long>(h) - 1); ++y)
      for (long x = std::max(0L, xa); x <= std::min<long>(xb, static_cast<long>(w) - 1); ++x) {
        const double u = (x + 0.5 - d.cx) / d.rx, v = (y + 0.5 - d.cy) / d.ry;
        if (u * u + v * v > 1.0) continue;
        const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
        auto& cls = mask.at(ux, uy);
        if (cls != class_index(WearClass::kSurfaceSpalling) &&
            cls != class_index(WearClass::kAdhesiveWear))
          continue;
        cls = class_index(WearClass::kAdhesiveWear);
        value[uy * w + ux] = spec.adhesive_gray + 10.0 * (u * u + v * v);
      }
  }

  Rng noise(noise_seed);
  GrayImage image(w, h);
  for (std::size_t i = 0; i < w * h; ++i) {
    const double v = value[i] + (spec.noise_sigma > 0.0 ? noise.normal(0.0, spec.noise_sigma) : 0.0);
    image.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
  }
  return {std::move(image), std::move(mask)};
}

Sample generate(const SyntheticSpec& spec) {
  spec.validate();
  const auto rows = band_rows(spec, derive_seed({spec.seed, kLayout}));
  const auto dots = sample_dots(spec, rows, spec.dot_density(), derive_seed({spec.seed, kDots}));
  return render(spec, rows, dots, derive_seed({spec.seed, kTexture}), derive_seed({spec.seed, kNoise}));
}

void SequenceSpec::validate() const {
  if (num_frames == 0) throw ConfigError("sequence needs at least one frame");
  if (stroke_step == 0) throw ConfigError("stroke indices must be strictly increasing (step > 0)");
  if (!(wear_tau > 0.0)) throw ConfigError("wear time constant must be positive");
  for (std::size_t i = 1; i < cleaning_strokes.size(); ++i)
    if (cleaning_strokes[i] <= cleaning_strokes[i - 1])
      throw ConfigError("cleaning strokes must be strictly increasing");
}

std::vector<std::uint64_t> SequenceSpec::strokes() const {
  std::vector<std::uint64_t> out(num_frames);
  for (std::size_t i = 0; i < num_frames; ++i) out[i] = first_stroke + i * stroke_step;
  return out;
}

double SequenceSpec::wear_at(std::uint64_t stroke) const {
  std::uint64_t since = 0;
  for (auto c : cleaning_strokes)
    if (c <= stroke) since = c;
  return 1.0 - std::exp(-static_cast<double>(stroke - since) / wear_tau);
}

void generate_sequence(const SequenceSpec& seq, const SyntheticSpec& spec,
                       const std::function<void(const Frame&)>& sink) {
  seq.validate();
  spec.validate();
  const auto rows = band_rows(spec, derive_seed({spec.seed, kLayout}));
  const std::uint64_t texture = derive_seed({spec.seed, kTexture});

  // One master dot list per interval between cleaning stops; a frame shows
  // the first floor(t * n) of them.
  std::size_t interval = static_cast<std::size_t>(-1);
  std::vector<Dot> master;
  for (auto stroke : seq.strokes()) {
    std::size_t k = 0;
    for (auto c : seq.cleaning_strokes)
      if (c <= stroke) ++k;
    if (k != interval) {
      interval = k;
      master = sample_dots(spec, rows, spec.max_dot_density, derive_seed({spec.seed, kDots, k}));
    }
    const double t = seq.wear_at(stroke);
    const auto visible = static_cast<std::size_t>(std::floor(t * static_cast<double>(master.size())));
    const std::vector<Dot> dots(master.begin(), master.begin() + static_cast<long>(visible));
    Frame frame;
    frame.stroke = stroke;
    frame.wear_level = t;
    frame.sample = render(spec, rows, dots, texture, derive_seed({spec.seed, kNoise, stroke}));
    sink(frame);
  }
}

std::vector<Frame> generate_sequence(const SequenceSpec& seq, const SyntheticSpec& spec) {
  std::vector<Frame> frames;
  generate_sequence(seq, spec, [&](const Frame& f) { frames.push_back(f); });
  return frames;
}

}  // namespace wearseg::synth

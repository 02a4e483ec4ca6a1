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
#include <map>
#include <string>
#include <vector>

#include "wearseg/image.hpp"
#include "wearseg/rng.hpp"
#include "wearseg/tensor.hpp"

namespace wearseg {

/// Exact positive fraction, used for the filter scaling factor so that
/// channel widths stay integral (1/16 of 64 is exactly 4).
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational reduced() const;
  std::string str() const;
  /// Accepts "a/b", integers, or decimals with a finite binary-friendly
  /// expansion such as "0.0625".
  static Rational parse(const std::string& text);
  bool operator==(const Rational& o) const {
    return num * o.den == o.num * den;
  }
};

/// Architecture knobs of the encoder-decoder network.
struct UNetConfig {
  Rational phi{1, 1};
  double delta = 0.48;
  std::size_t in_channels = 1;
  std::size_t num_classes = kNumClasses;
  std::size_t base_filters = 64;
  std::size_t depth = 4;
  std::vector<double> base_dropout{0.1, 0.1, 0.2, 0.2, 0.3};

  /// ConfigError unless every level width is a positive integer and every
  /// effective dropout rate lies in [0, 1).
  void validate() const;
  /// Channel widths per resolution level, depth + 1 entries (last = bottleneck).
  std::vector<std::size_t> widths() const;
  double dropout_rate(std::size_t level) const { return delta * base_dropout.at(level); }
  /// Required multiple for input height and width.
  std::size_t spatial_multiple() const { return std::size_t{1} << depth; }
  bool operator==(const UNetConfig&) const = default;
};

struct LayerEntry {
  std::string name;
  Shape shape;
  std::size_t byte_offset = 0;
  std::size_t byte_size = 0;
};

/// Ordered parameter manifest with contiguous little-endian float32 offsets.
std::vector<LayerEntry> layer_manifest(const UNetConfig& config);

/// Closed-form parameter count.
std::size_t param_count(const UNetConfig& config);

class UNet {
 public:
  /// He-normal weights drawn from `seed`. Biases are zero except in the first
  /// convolution, where each filter is offset to respond at zero for a
  /// uniform mid-gray input.
  static UNet build(const UNetConfig& config, std::uint64_t seed);
  /// Wraps existing parameter tensors; shapes must follow layer_manifest().
  static UNet from_parameters(const UNetConfig& config, std::vector<Tensor> params);

  const UNetConfig& config() const { return config_; }
  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  const std::vector<LayerEntry>& manifest() const { return manifest_; }
  std::size_t materialized_param_count() const;

  /// Pre-softmax class scores, N x num_classes x H x W. `rng` drives dropout
  /// and may be null when !training.
  Tensor logits(const Tensor& images, bool training, Rng* rng = nullptr) const;
  /// Per-pixel class probabilities.
  Tensor forward(const Tensor& images, bool training, Rng* rng = nullptr) const;
  /// Argmax label masks for each image of the batch (evaluation mode).
  std::vector<LabelMask> predict(const Tensor& images) const;

  void zero_grad();
  /// Deep copy of parameter values (no gradients).
  UNet clone() const;

 private:
  UNet(UNetConfig config, std::vector<LayerEntry> manifest, std::vector<Tensor> params)
      : config_(std::move(config)), manifest_(std::move(manifest)), params_(std::move(params)) {}

  UNetConfig config_;
  std::vector<LayerEntry> manifest_;
  std::vector<Tensor> params_;
};

/// Argmax over channels of an N x K x H x W tensor.
std::vector<LabelMask> argmax_masks(const Tensor& scores);

struct TrainingMetadata {
  std::int64_t epoch = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
  bool operator==(const TrainingMetadata&) const = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Self-describing binary checkpoint:
///   "WSEGCKPT" | u32 version | u64 header_len | header text |
///   u64 blob_len | float32 LE blob
/// The header holds `key = value` lines for the config and metadata plus one
/// `layer = name shape offset size` line per parameter tensor.
void save_checkpoint(const UNet& model, const TrainingMetadata& meta,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  UNet model;
  TrainingMetadata metadata;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// In-memory variants used by the file functions and by tests that corrupt
/// bytes on purpose.
std::vector<std::uint8_t> serialize_checkpoint(const UNet& model, const TrainingMetadata& meta);
LoadedCheckpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

}  // namespace wearseg

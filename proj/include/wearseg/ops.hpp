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
#include <span>
#include <vector>

#include "wearseg/rng.hpp"
#include "wearseg/tensor.hpp"

// Differentiable layer set for the segmentation network. All image tensors
// use N x C x H x W layout. Every op is instantiated for float (training) and
// double (gradient verification).
namespace wearseg::ops {

struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::array<std::size_t, 2> kernel{3, 3};
  std::array<std::size_t, 2> stride{1, 1};
  std::array<std::size_t, 2> padding{0, 0};
  bool has_bias = true;

  /// 3x3 stride-1 convolution that preserves spatial size.
  static ConvSpec same3x3(std::size_t in, std::size_t out) {
    return {in, out, {3, 3}, {1, 1}, {1, 1}, true};
  }
  static ConvSpec pointwise(std::size_t in, std::size_t out) {
    return {in, out, {1, 1}, {1, 1}, {0, 0}, true};
  }

  void validate() const;
  Shape weight_shape() const { return {out_channels, in_channels, kernel[0], kernel[1]}; }
  /// Output extent along one axis; ConfigError unless it divides evenly.
  std::size_t output_extent(std::size_t in, int axis) const;
};

/// Cross-correlation with zero padding. weights: (Co, Ci, kh, kw), bias: (Co).
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const ConvSpec& spec,
                      const BasicTensor<T>& weights, const BasicTensor<T>& bias);

template <typename T>
struct PoolResult {
  BasicTensor<T> output;
  /// Flat index into the input for every output element.
  std::vector<std::uint32_t> argmax;
};

/// 2x2 stride-2 max pooling. Ties go to the first element in row-major
/// window order.
template <typename T>
PoolResult<T> maxpool2d(const BasicTensor<T>& input);

/// 2x2 stride-2 transposed convolution. weights: (Ci, Co, 2, 2), bias: (Co).
/// Doubles both spatial extents.
template <typename T>
BasicTensor<T> transposed_conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                 const BasicTensor<T>& bias);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);

/// Softmax across the channel axis, independently per pixel.
template <typename T>
BasicTensor<T> softmax_channels(const BasicTensor<T>& input);

/// Inverted dropout. Identity when !training or rate == 0.
template <typename T>
BasicTensor<T> dropout(const BasicTensor<T>& input, double rate, Rng& rng, bool training);

/// Concatenates two N x C x H x W tensors along the channel axis.
template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Sum of x[i] * coeffs[i]. Handy as a scalar probe for gradient checks.
template <typename T>
BasicTensor<T> weighted_sum(const BasicTensor<T>& x, std::span<const T> coeffs);

inline constexpr double kLogClamp = 1e-12;

/// Normalized weighted negative log-likelihood on probabilities:
///   loss = -sum(w * log(max(p_target, 1e-12))) / sum(w)
/// probs: (N, K, H, W); target: N*H*W class indices; pixel_weights: (N, H, W),
/// not differentiated.
template <typename T>
BasicTensor<T> weighted_cross_entropy(const BasicTensor<T>& probs,
                                      std::span<const std::uint8_t> target,
                                      const BasicTensor<T>& pixel_weights);

/// Same loss evaluated from logits with a fused, log-sum-exp stable softmax.
/// This is the path used for training.
template <typename T>
BasicTensor<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                     std::span<const std::uint8_t> target,
                                     const BasicTensor<T>& pixel_weights);

}  // namespace wearseg::ops

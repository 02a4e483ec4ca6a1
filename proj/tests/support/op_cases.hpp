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

#include <string>
#include <vector>

#include "support/gradcheck.hpp"
#include "wearseg/ops.hpp"

namespace wearseg::testing {

struct OpCheck {
  std::string op;
  std::string shape;
  double error = 0.0;
};

inline TensorD probe(const TensorD& y, Rng& rng) {
  const auto c = random_coeffs(y.numel(), rng);
  return ops::weighted_sum<double>(y, c);
}

/// Five randomized shapes for each differentiable op.
inline std::vector<OpCheck> run_op_gradchecks(std::uint64_t seed) {
  std::vector<OpCheck> out;
  Rng rng(seed);

  struct ConvCase { Shape in; std::size_t co, k, pad, stride; };
  const ConvCase conv_cases[] = {
      {{2, 3, 8, 8}, 4, 3, 1, 1}, {{1, 2, 5, 7}, 3, 3, 0, 1}, {{2, 1, 6, 6}, 2, 1, 0, 1},
      {{1, 3, 7, 7}, 2, 3, 1, 2}, {{3, 2, 4, 5}, 5, 3, 1, 1}};
  for (const auto& c : conv_cases) {
    ops::ConvSpec spec{c.in[1], c.co, {c.k, c.k}, {c.stride, c.stride}, {c.pad, c.pad}, true};
    auto x = random_tensor(c.in, rng);
    auto w = random_tensor(spec.weight_shape(), rng);
    auto b = random_tensor({c.co}, rng);
    const std::uint64_t probe_seed = rng.next_u64();
    auto r = gradcheck(
        [&](std::vector<TensorD>& in) {
          Rng pr(probe_seed);
          return probe(ops::conv2d(in[0], spec, in[1], in[2]), pr);
        },
        {x, w, b});
    out.push_back({"conv2d", shape_str(c.in), r.max_relative_error});
  }

  const Shape pool_shapes[] = {{1, 2, 6, 6}, {2, 1, 4, 4}, {1, 3, 2, 8}, {2, 2, 6, 4}, {1, 1, 8, 2}};
  for (const auto& s : pool_shapes) {
    auto x = random_distinct(s, rng);
    const std::uint64_t probe_seed = rng.next_u64();
    auto r = gradcheck(
        [&](std::vector<TensorD>& in) {
          Rng pr(probe_seed);
          return probe(ops::maxpool2d(in[0]).output, pr);
        },
        {x});
    out.push_back({"maxpool2d", shape_str(s), r.max_relative_error});
  }

  struct TconvCase { Shape in; std::size_t co; };
  const TconvCase tconv_cases[] = {
      {{1, 3, 4, 4}, 2}, {{2, 2, 3, 3}, 3}, {{1, 1, 2, 5}, 1}, {{2, 4, 2, 2}, 2}, {{1, 2, 5, 3}, 4}};
  for (const auto& c : tconv_cases) {
    auto x = random_tensor(c.in, rng);
    auto w = random_tensor({c.in[1], c.co, 2, 2}, rng);
    auto b = random_tensor({c.co}, rng);
    const std::uint64_t probe_seed = rng.next_u64();
    auto r = gradcheck(
        [&](std::vector<TensorD>& in) {
          Rng pr(probe_seed);
          return probe(ops::transposed_conv2d(in[0], in[1], in[2]), pr);
        },
        {x, w, b});
    out.push_back({"transposed_conv2d", shape_str(c.in), r.max_relative_error});
  }

  const Shape relu_shapes[] = {{1, 2, 4, 4}, {2, 3, 3, 3}, {1, 1, 7, 5}, {3, 2, 2, 2}, {1, 4, 1, 6}};
  for (const auto& s : relu_shapes) {
    auto x = random_away_from_zero(s, rng);
    const std::uint64_t probe_seed = rng.next_u64();
    auto r = gradcheck(
        [&](std::vector<TensorD>& in) {
          Rng pr(probe_seed);
          return probe(ops::relu(in[0]), pr);
        },
        {x});
    out.push_back({"relu", shape_str(s), r.max_relative_error});
  }

  const Shape ce_shapes[] = {{1, 6, 4, 4}, {2, 6, 3, 5}, {1, 3, 6, 2}, {3, 2, 2, 2}, {2, 4, 5, 5}};
  for (const auto& s : ce_shapes) {
    auto logits = random_tensor(s, rng, -3.0, 3.0);
    const std::size_t pixels = s[0] * s[2] * s[3];
    std::vector<std::uint8_t> target(pixels);
    for (auto& t : target) t = static_cast<std::uint8_t>(rng.uniform_int(s[1]));
    std::vector<double> w(pixels);
    for (auto& v : w) v = rng.uniform(0.5, 3.0);
    TensorD weights({s[0], s[2], s[3]}, w);
    auto r = gradcheck(
        [&](std::vector<TensorD>& in) {
          return ops::softmax_cross_entropy<double>(in[0], target, weights);
        },
        {logits});
    out.push_back({"softmax_cross_entropy", shape_str(s), r.max_relative_error});
  }

  // Unfused path: softmax followed by the probability-space loss.
  const Shape sm_shapes[] = {{1, 6, 3, 3}, {2, 4, 2, 3}, {1, 2, 4, 4}, {2, 3, 1, 5}, {1, 5, 2, 2}};
  for (const auto& s : sm_shapes) {
    auto logits = random_tensor(s, rng, -2.0, 2.0);
    const std::size_t pixels = s[0] * s[2] * s[3];
    std::vector<std::uint8_t> target(pixels);
    for (auto& t : target) t = static_cast<std::uint8_t>(rng.uniform_int(s[1]));
    TensorD weights({s[0], s[2], s[3]}, 1.0);
    auto r = gradcheck(
        [&](std::vector<TensorD>& in) {
          return ops::weighted_cross_entropy<double>(ops::softmax_channels(in[0]), target, weights);
        },
        {logits});
    out.push_back({"softmax+weighted_cross_entropy", shape_str(s), r.max_relative_error});
  }

  const Shape cat_shapes[] = {{1, 2, 3, 3}, {2, 1, 2, 4}, {1, 3, 1, 1}, {2, 2, 2, 2}, {1, 1, 5, 3}};
  for (const auto& s : cat_shapes) {
    auto a = random_tensor(s, rng);
    Shape sb = s;
    sb[1] += 1;
    auto b = random_tensor(sb, rng);
    const std::uint64_t probe_seed = rng.next_u64();
    auto r = gradcheck(
        [&](std::vector<TensorD>& in) {
          Rng pr(probe_seed);
          return probe(ops::concat_channels(in[0], in[1]), pr);
        },
        {a, b});
    out.push_back({"concat_channels", shape_str(s), r.max_relative_error});
  }

  const Shape drop_shapes[] = {{1, 2, 4, 4}, {2, 3, 3, 3}, {1, 1, 6, 6}, {2, 2, 2, 5}, {1, 4, 3, 2}};
  for (const auto& s : drop_shapes) {
    auto x = random_tensor(s, rng);
    const std::uint64_t mask_seed = rng.next_u64(), probe_seed = rng.next_u64();
    auto r = gradcheck(
        [&](std::vector<TensorD>& in) {
          Rng mr(mask_seed), pr(probe_seed);
          return probe(ops::dropout(in[0], 0.3, mr, true), pr);
        },
        {x});
    out.push_back({"dropout", shape_str(s), r.max_relative_error});
  }
  return out;
}

}  // namespace wearseg::testing

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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wearseg/tensor.hpp"

namespace wearseg {

struct AdamOptions {
  double learning_rate = 5.4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::int64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, T(0)), v(n, T(0)) {}
};

/// One bias-corrected Adam update on a flat parameter array.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state,
               const AdamOptions& options);

/// Updates a parameter list from the gradients accumulated on it. Parameters
/// without a gradient are skipped (treated as a zero gradient for SGD and
/// still advanced with zero gradient for Adam, keeping step counts aligned).
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(std::span<Tensor> params) = 0;
  virtual std::string name() const = 0;
};

class Adam final : public Optimizer {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}
  void step(std::span<Tensor> params) override;
  std::string name() const override { return "adam"; }
  const std::vector<AdamState<float>>& states() const { return states_; }

 private:
  AdamOptions options_;
  std::vector<AdamState<float>> states_;
};

class Sgd final : public Optimizer {
 public:
  explicit Sgd(double learning_rate, double momentum = 0.0)
      : learning_rate_(learning_rate), momentum_(momentum) {}
  void step(std::span<Tensor> params) override;
  std::string name() const override { return "sgd"; }

 private:
  double learning_rate_;
  double momentum_;
  std::vector<std::vector<float>> velocity_;
};

/// "adam" or "sgd"; anything else is a ConfigError.
std::unique_ptr<Optimizer> make_optimizer(const std::string& kind, double learning_rate);

}  // namespace wearseg

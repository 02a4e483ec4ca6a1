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

#include "wearseg/optim.hpp"

#include <cmath>

namespace wearseg {

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state,
               const AdamOptions& o) {
  if (params.size() != grads.size() || state.m.size() != params.size())
    throw ConfigError("adam_step: parameter, gradient and state sizes differ");
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(o.beta1), b2 = static_cast<T>(o.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= static_cast<T>(o.learning_rate * mhat / (std::sqrt(vhat) + o.epsilon));
  }
}

template void adam_step<float>(std::span<float>, std::span<const float>, AdamState<float>&,
                               const AdamOptions&);
template void adam_step<double>(std::span<double>, std::span<const double>, AdamState<double>&,
                                const AdamOptions&);

void Adam::step(std::span<Tensor> params) {
  if (states_.empty())
    for (auto& p : params) states_.emplace_back(p.numel());
  if (states_.size() != params.size())
    throw ConfigError("Adam::step called with a different parameter list");
  std::vector<float> zeros;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    std::span<const float> g = p.grad();
    if (g.empty()) {
      zeros.assign(p.numel(), 0.0f);
      g = zeros;
    }
    adam_step<float>(p.mutable_data(), g, states_[i], options_);
  }
}

void Sgd::step(std::span<Tensor> params) {
  if (velocity_.empty())
    for (auto& p : params) velocity_.emplace_back(p.numel(), 0.0f);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = params[i].grad();
    if (g.empty()) continue;
    auto data = params[i].mutable_data();
    auto& vel = velocity_[i];
    for (std::size_t j = 0; j < data.size(); ++j) {
      vel[j] = static_cast<float>(momentum_) * vel[j] + g[j];
      data[j] -= static_cast<float>(learning_rate_) * vel[j];
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(const std::string& kind, double learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (kind == "adam") {
    AdamOptions o;
    o.learning_rate = learning_rate;
    return std::make_unique<Adam>(o);
  }
  if (kind == "sgd") return std::make_unique<Sgd>(learning_rate);
  throw ConfigError("unknown optimizer '" + kind + "' (expected adam or sgd)");
}

}  // namespace wearseg

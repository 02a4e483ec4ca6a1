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

#include "wearseg/rng.hpp"

#include <array>

namespace wearseg {
namespace {

// Marsaglia & Tsang ziggurat, 128 layers (Doornik's ZIGNOR constants).
constexpr int kLayers = 128;
constexpr double kTailStart = 3.442619855899;
constexpr double kLayerArea = 9.91256303526217e-3;

struct ZigguratTable {
  std::array<double, kLayers + 1> x{};
  std::array<double, kLayers> ratio{};

  ZigguratTable() {
    double f = std::exp(-0.5 * kTailStart * kTailStart);
    x[0] = kLayerArea / f;
    x[1] = kTailStart;
    x[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) {
      x[i] = std::sqrt(-2.0 * std::log(kLayerArea / x[i - 1] + f));
      f = std::exp(-0.5 * x[i] * x[i]);
    }
    for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

const ZigguratTable& table() {
  static const ZigguratTable t;
  return t;
}

}  // namespace

double Rng::ziggurat_tail(bool negative) {
  double x, y;
  do {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    while (u2 <= 0.0) u2 = uniform();
    x = std::log(u1) / kTailStart;
    y = std::log(u2);
  } while (-2.0 * y < x * x);
  return negative ? x - kTailStart : kTailStart - x;
}

double Rng::ziggurat() {
  const ZigguratTable& t = table();
  for (;;) {
    const std::uint64_t bits = engine_();
    const double u = 2.0 * (static_cast<double>(bits >> 11) * 0x1.0p-53) - 1.0;
    const int i = static_cast<int>(bits & (kLayers - 1));
    if (std::abs(u) < t.ratio[i]) return u * t.x[i];
    if (i == 0) return ziggurat_tail(u < 0.0);
    const double x = u * t.x[i];
    const double f0 = std::exp(-0.5 * (t.x[i] * t.x[i] - x * x));
    const double f1 = std::exp(-0.5 * (t.x[i + 1] * t.x[i + 1] - x * x));
    if (f1 + uniform() * (f0 - f1) < 1.0) return x;
  }
}

}  // namespace wearseg

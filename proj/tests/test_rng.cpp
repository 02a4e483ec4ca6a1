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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "wearseg/rng.hpp"

namespace wearseg {
namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov-Smirnov distance between a sample and the standard normal.
double ks_distance(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = normal_cdf(v[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(Rng(42).next_u64(), Rng(43).next_u64());
}

TEST(Rng, DeriveSeedDependsOnEveryKeyAndOrder) {
  EXPECT_NE(derive_seed({1, 2}), derive_seed({2, 1}));
  EXPECT_NE(derive_seed({1, 2}), derive_seed({1, 2, 0}));
  EXPECT_EQ(derive_seed({7, 8, 9}), derive_seed({7, 8, 9}));
}

TEST(Rng, UniformRanges) {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.uniform_int(7), 7u);
  }
  EXPECT_EQ(r.uniform_int(1), 0u);
}

TEST(Rng, BoxMullerAndZigguratMatchStandardNormal) {
  constexpr std::size_t n = 200000;
  Rng r(11);
  std::vector<double> bm(n), zig(n);
  for (auto& v : bm) v = r.normal();
  r.fill_normal(zig, 0.0, 1.0);
  // 0.1% critical value of the one-sample KS statistic.
  const double critical = 1.95 / std::sqrt(static_cast<double>(n));
  EXPECT_LT(ks_distance(bm), critical);
  EXPECT_LT(ks_distance(zig), critical);

  double mean = 0.0, var = 0.0;
  std::size_t tail = 0;
  for (double v : zig) {
    mean += v;
    var += v * v;
    tail += std::abs(v) > 3.442619855899;
  }
  mean /= n;
  var = var / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.01);
  // Both tails beyond the ziggurat base: 2 * (1 - cdf(3.4426)) ~ 5.76e-4.
  const double expected_tail = n * 2.0 * (1.0 - normal_cdf(3.442619855899));
  EXPECT_NEAR(static_cast<double>(tail), expected_tail, 4.0 * std::sqrt(expected_tail));
}

TEST(Rng, FillNormalScalesAndIsDeterministic) {
  std::vector<float> a(1001), b(1001);
  Rng(5).fill_normal(a, 2.0, 0.5);
  Rng(5).fill_normal(b, 2.0, 0.5);
  EXPECT_EQ(a, b);
  double mean = 0.0;
  for (float v : a) mean += v;
  EXPECT_NEAR(mean / a.size(), 2.0, 0.06);
}

TEST(Rng, PoissonMean) {
  Rng r(9);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) sum += static_cast<double>(r.poisson(3.5));
  EXPECT_NEAR(sum / 20000.0, 3.5, 0.06);
  EXPECT_EQ(r.poisson(0.0), 0u);
}

TEST(Rng, ShuffleIsPermutation) {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  Rng r(1);
  r.shuffle(v);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

}  // namespace
}  // namespace wearseg

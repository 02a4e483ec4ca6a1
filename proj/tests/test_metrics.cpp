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

#include <sstream>

#include "support/brute_metrics.hpp"
#include "wearseg/metrics.hpp"

namespace wearseg {
namespace {

LabelMask square(std::size_t x0, std::size_t y0, std::size_t w, std::size_t h, std::uint8_t k) {
  LabelMask m(40, 40, 0);
  for (std::size_t y = y0; y < y0 + h; ++y)
    for (std::size_t x = x0; x < x0 + w; ++x) m.at(x, y) = k;
  return m;
}

TEST(Iou, IdenticalMasksScoreOne) {
  const auto m = square(3, 4, 10, 10, 2);
  EXPECT_EQ(iou(m, m, 2), 1.0);
  EXPECT_EQ(iou(m, m, 0), 1.0);
  EXPECT_FALSE(iou(m, m, 5).has_value());
}

TEST(Iou, DisjointRegionsScoreZero) {
  EXPECT_EQ(iou(square(0, 0, 10, 10, 3), square(20, 20, 10, 10, 3), 3), 0.0);
}

TEST(Iou, HalfOverlappingSquares) {
  // Overlap is a 5 x 10 strip: 50 / (100 + 100 - 50).
  const auto a = square(0, 0, 10, 10, 4), b = square(5, 0, 10, 10, 4);
  EXPECT_DOUBLE_EQ(*iou(a, b, 4), 50.0 / 150.0);
  EXPECT_EQ(iou(a, b, 4), iou(b, a, 4));
}

TEST(Iou, ShapeMismatchIsDataError) {
  EXPECT_THROW(iou(LabelMask(4, 4), LabelMask(4, 5), 0), DataError);
  EXPECT_THROW(evaluate(LabelMask(4, 4), LabelMask(5, 4)), DataError);
}

TEST(Evaluate, MatchesBruteForceOracle) {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = testing::random_blocky_mask(32, 32, rng), t = testing::random_blocky_mask(32, 32, rng);
    const auto r = evaluate(p, t);
    EXPECT_EQ(r.confusion, testing::brute_confusion(p, t));
    std::uint64_t total = 0;
    for (const auto& row : r.confusion)
      for (auto v : row) total += v;
    EXPECT_EQ(total, 32u * 32u);
    for (std::size_t k = 0; k < kNumClasses; ++k) EXPECT_EQ(r.iou[k], testing::brute_iou(p, t, k));
  }
}

TEST(Evaluate, AbsentClassIsExcludedFromMean) {
  LabelMask t(4, 1), p(4, 1);
  t.classes = {0, 0, 1, 1};
  p.classes = {0, 1, 1, 1};
  const auto r = evaluate(p, t);
  EXPECT_DOUBLE_EQ(*r.iou[0], 0.5);
  EXPECT_DOUBLE_EQ(*r.iou[1], 2.0 / 3.0);
  for (std::size_t k = 2; k < kNumClasses; ++k) EXPECT_FALSE(r.iou[k].has_value());
  EXPECT_DOUBLE_EQ(*r.mean_iou, (0.5 + 2.0 / 3.0) / 2.0);
  EXPECT_EQ(r.pred_counts[1], 3u);
  EXPECT_EQ(r.truth_counts[1], 2u);
}

TEST(EvaluateDataset, IdenticalPairsScoreOne) {
  Rng rng(1);
  std::vector<LabelMask> masks;
  for (int i = 0; i < 5; ++i) masks.push_back(testing::random_blocky_mask(16, 16, rng));
  const auto d = evaluate_dataset(masks, masks);
  EXPECT_EQ(*d.micro.mean_iou, 1.0);
  EXPECT_EQ(*d.macro_mean_iou, 1.0);
}

TEST(EvaluateDataset, MicroAndMacroAggregation) {
  // Image A: class 1 fully right (4 px). Image B: class 1 half right.
  LabelMask ta(2, 2, 1), pa(2, 2, 1);
  LabelMask tb(2, 2, 1), pb(2, 2, 1);
  pb.classes = {1, 1, 0, 0};
  const std::vector<LabelMask> preds{pa, pb}, truths{ta, tb};
  const auto d = evaluate_dataset(preds, truths, std::vector<std::string>{"a", "b"});
  // Micro: intersections 4 + 2, unions 4 + 4.
  EXPECT_DOUBLE_EQ(*d.micro.iou[1], 6.0 / 8.0);
  EXPECT_DOUBLE_EQ(*d.macro_iou[1], (1.0 + 0.5) / 2.0);
  // Class 0 only appears (as a prediction) in image B.
  EXPECT_DOUBLE_EQ(*d.macro_iou[0], 0.0);
  EXPECT_EQ(d.ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(evaluate_dataset(std::vector<LabelMask>{}, std::vector<LabelMask>{}), DataError);
  EXPECT_THROW(evaluate_dataset(preds, std::vector<LabelMask>{ta}), DataError);
}

TEST(MetricsCsv, HeaderAndRows) {
  LabelMask t(2, 1), p(2, 1);
  t.classes = {0, 1};
  p.classes = {0, 0};
  const std::vector<LabelMask> preds{p}, truths{t};
  std::ostringstream os;
  write_metrics_csv(evaluate_dataset(preds, truths, std::vector<std::string>{"x"}), os);
  std::istringstream is(os.str());
  std::string header, row, micro, macro;
  std::getline(is, header);
  std::getline(is, row);
  std::getline(is, micro);
  std::getline(is, macro);
  EXPECT_EQ(header.rfind("scope,id,iou_0,iou_1,iou_2,iou_3,iou_4,iou_5,mean_iou,pixels", 0), 0u);
  EXPECT_EQ(row.rfind("image,x,0.500000,0.000000,,,,,0.250000,2", 0), 0u) << row;
  EXPECT_EQ(micro.rfind("micro,", 0), 0u);
  EXPECT_EQ(macro.rfind("macro,", 0), 0u);
}

TEST(Series, CountsAndSmoothing) {
  std::vector<LabelMask> masks;
  std::vector<std::uint64_t> strokes;
  for (std::size_t i = 0; i < 4; ++i) {
    LabelMask m(10, 10, 0);
    for (std::size_t j = 0; j < 37 + i; ++j) m.classes[j] = 5;
    masks.push_back(m);
    strokes.push_back(100 * i);
  }
  const auto s = pixel_count_series(strokes, masks, 5);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].count, 37u);
  EXPECT_EQ(s[3].count, 40u);
  EXPECT_EQ(s[3].stroke, 300u);
  EXPECT_EQ(s[2].smoothed, 39.0);
  const auto zero = pixel_count_series(strokes, masks, 3);
  for (const auto& p : zero) EXPECT_EQ(p.count, 0u);
  const auto smooth = pixel_count_series(strokes, masks, 5, 2);
  EXPECT_EQ(smooth[0].smoothed, 37.0);
  EXPECT_EQ(smooth[1].smoothed, 37.5);
  EXPECT_EQ(smooth[3].smoothed, 39.5);
}

TEST(Pearson, KnownValues) {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1}, flat{1, 1, 1, 1};
  EXPECT_NEAR(*pearson(a, b), 1.0, 1e-15);
  EXPECT_NEAR(*pearson(a, c), -1.0, 1e-15);
  EXPECT_FALSE(pearson(a, flat).has_value());
}

}  // namespace
}  // namespace wearseg

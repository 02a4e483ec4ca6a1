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
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wearseg/image.hpp"

namespace wearseg {

/// counts[truth][pred]
using ConfusionMatrix = std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>;
using ClassIou = std::array<std::optional<double>, kNumClasses>;

ConfusionMatrix confusion_matrix(const LabelMask& pred, const LabelMask& truth);

/// |pred_k & truth_k| / |pred_k | truth_k|, or nullopt when the union is empty.
std::optional<double> iou(const LabelMask& pred, const LabelMask& truth, std::size_t cls);

struct MetricsReport {
  ClassIou iou{};
  /// Mean over classes whose IoU is present.
  std::optional<double> mean_iou;
  std::array<std::uint64_t, kNumClasses> pred_counts{};
  std::array<std::uint64_t, kNumClasses> truth_counts{};
  ConfusionMatrix confusion{};
  std::uint64_t pixels = 0;
};

MetricsReport report_from_confusion(const ConfusionMatrix& cm);
MetricsReport evaluate(const LabelMask& pred, const LabelMask& truth);

/// Present-class mean of a per-class IoU array.
std::optional<double> mean_of_present(const ClassIou& iou);

struct DatasetMetrics {
  std::vector<std::string> ids;
  std::vector<MetricsReport> per_image;
  /// Summed intersections and unions over the whole dataset.
  MetricsReport micro;
  /// Per-class average of per-image IoUs, skipping images where the class is absent.
  ClassIou macro_iou{};
  std::optional<double> macro_mean_iou;
};

/// DataError on an empty dataset or a count mismatch.
DatasetMetrics evaluate_dataset(std::span<const LabelMask> preds, std::span<const LabelMask> truths,
                                std::span<const std::string> ids = {});

/// Columns: scope,id,iou_0..iou_5,mean_iou,pixels,pred_count_0..5,truth_count_0..5.
/// scope is "image" for each input pair, then "micro" and "macro" rows.
/// Absent values are written as empty fields.
void write_metrics_csv(const DatasetMetrics& metrics, std::ostream& out);

struct SeriesPoint {
  std::uint64_t stroke = 0;
  std::uint64_t count = 0;
  double smoothed = 0.0;  // equals count when smoothing is off
};

/// Exact per-mask pixel count of class `cls`; `window` > 1 enables a trailing
/// moving average in `smoothed`.
std::vector<SeriesPoint> pixel_count_series(std::span<const std::uint64_t> strokes,
                                            std::span<const LabelMask> masks, std::size_t cls,
                                            std::size_t window = 0);

/// Pearson correlation; nullopt when either series is constant.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

}  // namespace wearseg

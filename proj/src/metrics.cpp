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

#include "wearseg/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace wearseg {

ConfusionMatrix confusion_matrix(const LabelMask& pred, const LabelMask& truth) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw DataError("prediction " + std::to_string(pred.width) + "x" + std::to_string(pred.height) +
                    " and ground truth " + std::to_string(truth.width) + "x" +
                    std::to_string(truth.height) + " differ in shape");
  pred.validate();
  truth.validate();
  ConfusionMatrix cm{};
  for (std::size_t i = 0; i < pred.classes.size(); ++i) ++cm[truth.classes[i]][pred.classes[i]];
  return cm;
}

namespace {

std::optional<double> iou_from_confusion(const ConfusionMatrix& cm, std::size_t k) {
  std::uint64_t pred_k = 0, truth_k = 0;
  for (std::size_t j = 0; j < kNumClasses; ++j) {
    pred_k += cm[j][k];
    truth_k += cm[k][j];
  }
  const std::uint64_t inter = cm[k][k];
  const std::uint64_t uni = pred_k + truth_k - inter;
  if (uni == 0) return std::nullopt;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

void put_optional(std::ostream& out, const std::optional<double>& v) {
  if (!v) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  out << buf;
}

}  // namespace

std::optional<double> iou(const LabelMask& pred, const LabelMask& truth, std::size_t cls) {
  if (cls >= kNumClasses) throw ConfigError("class index " + std::to_string(cls) + " out of range");
  return iou_from_confusion(confusion_matrix(pred, truth), cls);
}

std::optional<double> mean_of_present(const ClassIou& iou) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : iou)
    if (v) {
      sum += *v;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

MetricsReport report_from_confusion(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.confusion = cm;
  for (std::size_t t = 0; t < kNumClasses; ++t)
    for (std::size_t p = 0; p < kNumClasses; ++p) {
      r.truth_counts[t] += cm[t][p];
      r.pred_counts[p] += cm[t][p];
      r.pixels += cm[t][p];
    }
  for (std::size_t k = 0; k < kNumClasses; ++k) r.iou[k] = iou_from_confusion(cm, k);
  r.mean_iou = mean_of_present(r.iou);
  return r;
}

MetricsReport evaluate(const LabelMask& pred, const LabelMask& truth) {
  return report_from_confusion(confusion_matrix(pred, truth));
}

DatasetMetrics evaluate_dataset(std::span<const LabelMask> preds, std::span<const LabelMask> truths,
                                std::span<const std::string> ids) {
  if (preds.empty()) throw DataError("cannot evaluate an empty dataset");
  if (preds.size() != truths.size())
    throw DataError("got " + std::to_string(preds.size()) + " predictions for " +
                    std::to_string(truths.size()) + " ground-truth masks");
  if (!ids.empty() && ids.size() != preds.size()) throw DataError("id count does not match dataset");
  DatasetMetrics m;
  ConfusionMatrix total{};
  std::array<double, kNumClasses> sums{};
  std::array<int, kNumClasses> present{};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    m.ids.push_back(ids.empty() ? std::to_string(i) : ids[i]);
    m.per_image.push_back(evaluate(preds[i], truths[i]));
    const auto& r = m.per_image.back();
    for (std::size_t t = 0; t < kNumClasses; ++t)
      for (std::size_t p = 0; p < kNumClasses; ++p) total[t][p] += r.confusion[t][p];
    for (std::size_t k = 0; k < kNumClasses; ++k)
      if (r.iou[k]) {
        sums[k] += *r.iou[k];
        ++present[k];
      }
  }
  m.micro = report_from_confusion(total);
  for (std::size_t k = 0; k < kNumClasses; ++k)
    if (present[k] > 0) m.macro_iou[k] = sums[k] / present[k];
  m.macro_mean_iou = mean_of_present(m.macro_iou);
  return m;
}

void write_metrics_csv(const DatasetMetrics& metrics, std::ostream& out) {
  out << "scope,id";
  for (std::size_t k = 0; k < kNumClasses; ++k) out << ",iou_" << k;
  out << ",mean_iou,pixels";
  for (std::size_t k = 0; k < kNumClasses; ++k) out << ",pred_count_" << k;
  for (std::size_t k = 0; k < kNumClasses; ++k) out << ",truth_count_" << k;
  out << '\n';
  auto row = [&](const char* scope, const std::string& id, const ClassIou& iou,
                 const std::optional<double>& mean, const MetricsReport* counts) {
    out << scope << ',' << id;
    for (const auto& v : iou) {
      out << ',';
      put_optional(out, v);
    }
    out << ',';
    put_optional(out, mean);
    out << ',';
    if (counts) out << counts->pixels;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      out << ',';
      if (counts) out << counts->pred_counts[k];
    }
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      out << ',';
      if (counts) out << counts->truth_counts[k];
    }
    out << '\n';
  };
  for (std::size_t i = 0; i < metrics.per_image.size(); ++i)
    row("image", metrics.ids[i], metrics.per_image[i].iou, metrics.per_image[i].mean_iou,
        &metrics.per_image[i]);
  row("micro", "all", metrics.micro.iou, metrics.micro.mean_iou, &metrics.micro);
  row("macro", "all", metrics.macro_iou, metrics.macro_mean_iou, nullptr);
}

std::vector<SeriesPoint> pixel_count_series(std::span<const std::uint64_t> strokes,
                                            std::span<const LabelMask> masks, std::size_t cls,
                                            std::size_t window) {
  if (strokes.size() != masks.size()) throw DataError("stroke and mask counts differ");
  if (cls >= kNumClasses) throw ConfigError("class index out of range");
  std::vector<SeriesPoint> out;
  out.reserve(masks.size());
  double running = 0.0;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    std::uint64_t count = 0;
    for (auto c : masks[i].classes) count += (c == cls);
    SeriesPoint p{strokes[i], count, static_cast<double>(count)};
    if (window > 1) {
      running += static_cast<double>(count);
      if (i >= window) running -= static_cast<double>(out[i - window].count);
      p.smoothed = running / static_cast<double>(std::min(window, i + 1));
    }
    out.push_back(p);
  }
  return out;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw DataError("pearson needs two equal series of length >= 2");
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace wearseg

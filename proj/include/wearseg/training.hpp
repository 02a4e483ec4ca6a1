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
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wearseg/augment.hpp"
#include "wearseg/bayesopt.hpp"
#include "wearseg/metrics.hpp"
#include "wearseg/unet.hpp"

namespace wearseg {

struct HistoryRow {
  std::int64_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_mean_iou;
  ClassIou val_iou{};
};

struct TrainConfig {
  double learning_rate = 5.4e-4;
  std::size_t batch_size = 4;
  std::size_t epochs = 60;
  std::array<double, kNumClasses> class_weights{1, 1, 1, 1, 1, 1};
  std::uint64_t seed = 0;
  std::string optimizer = "adam";
  std::size_t validate_every = 1;
  /// Also write epoch_NNNN.ckpt every this many epochs (0 = off).
  std::size_t checkpoint_every = 0;
  /// When set, best.ckpt and last.ckpt are written here.
  std::filesystem::path checkpoint_dir;
  /// Called after each epoch's history row is final.
  std::function<void(const HistoryRow&)> on_epoch;

  void validate() const;
};

struct Dataset {
  std::vector<DatasetItem> train;
  std::vector<DatasetItem> validation;
  std::vector<DatasetItem> test;
};

struct TrainResult {
  UNet model;       // parameters after the last epoch
  UNet best_model;  // parameters at the best validation epoch
  std::vector<HistoryRow> history;
  std::optional<double> best_val_mean_iou;
  std::int64_t best_epoch = 0;
  std::int64_t last_epoch = 0;
};

/// Mini-batch training with normalized class-weighted cross-entropy. Each
/// epoch is one pass over `data.train`, shuffled with an RNG derived from
/// (seed, epoch). Epoch numbers in the history continue from `start_epoch`.
/// A non-finite loss raises NumericError naming the epoch and batch.
TrainResult train(UNet model, const Dataset& data, const TrainConfig& config,
                  std::int64_t start_epoch = 0);

/// Per-pixel weights class_weights[truth] for an N x H x W batch.
Tensor pixel_weights(std::span<const LabelMask* const> masks,
                     const std::array<double, kNumClasses>& class_weights);

/// Predicts every item in evaluation mode and evaluates against its mask.
DatasetMetrics evaluate_model(const UNet& model, std::span<const DatasetItem> items,
                              std::size_t batch_size = 4);
std::vector<LabelMask> predict_items(const UNet& model, std::span<const DatasetItem> items,
                                     std::size_t batch_size = 4);

/// Validation mean IoU used for model selection: micro average over the set.
std::optional<double> selection_score(const DatasetMetrics& m);

/// Columns: epoch,train_loss,val_mean_iou,val_iou_0..val_iou_5.
void write_history_csv(std::span<const HistoryRow> history, std::ostream& out);

/// Resumes from a checkpoint with a fresh optimizer state. Epochs continue
/// from the checkpoint's metadata. ConfigError when the checkpoint's network
/// config differs from `expected`.
TrainResult continue_training(const LoadedCheckpoint& checkpoint, const UNetConfig& expected,
                              const Dataset& data, const TrainConfig& config);

struct GridSpec {
  std::vector<Rational> phis{{1, 16}, {1, 8}, {1, 4}, {1, 2}};
  std::vector<std::size_t> batch_sizes{1, 2, 4, 8, 16};
  std::size_t epochs = 60;

  void validate() const;
};

struct GridCell {
  Rational phi;
  std::size_t batch_size = 0;
  std::optional<double> max_val_mean_iou;
  std::string error;  // non-empty when training this cell failed
};

struct GridResult {
  std::vector<GridCell> cells;
  std::optional<std::size_t> best;  // index into cells
};

/// Trains one model per (phi, batch) cell with the shared seed; a failing
/// cell is recorded and the remaining cells still run.
GridResult grid_search(const GridSpec& grid, const UNetConfig& base_net, const TrainConfig& base_train,
                       const Dataset& data);

/// Columns: phi,batch_size,max_val_mean_iou,status; a final "argmax" row.
void write_grid_csv(const GridResult& grid, std::ostream& out);

/// Objective for class-weight search: best validation IoU of adhesive wear
/// after training with weights[adhesive] = w[0], weights[spalling] = w[1].
std::function<double(const Point2&)> class_weight_objective(const UNetConfig& net,
                                                            const TrainConfig& train,
                                                            const Dataset& data);

/// Columns: iteration,weight_adhesive,weight_spalling,value,incumbent,phase,length_scale.
void write_bayes_csv(const BayesResult& result, std::ostream& out);

}  // namespace wearseg

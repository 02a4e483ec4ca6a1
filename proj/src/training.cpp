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

#include "wearseg/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "wearseg/dataio.hpp"
#include "wearseg/ops.hpp"
#include "wearseg/optim.hpp"

namespace wearseg {
namespace {

std::string fmt(double v, const char* spec = "%.9g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v, "%.6f") : std::string(); }

Tensor batch_images(std::span<const DatasetItem> items, std::span<const std::size_t> idx) {
  std::vector<const GrayImage*> imgs;
  for (auto i : idx) imgs.push_back(&items[i].image);
  return images_to_tensor(imgs);
}

void save_named(const UNet& model, const TrainingMetadata& meta, const std::filesystem::path& dir,
                const std::string& name) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  save_checkpoint(model, meta, dir / name);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (validate_every == 0) throw ConfigError("validate_every must be >= 1");
  for (double w : class_weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("class weights must be finite and >= 0");
}

Tensor pixel_weights(std::span<const LabelMask* const> masks,
                     const std::array<double, kNumClasses>& class_weights) {
  if (masks.empty()) throw ConfigError("no masks for pixel weights");
  const std::size_t w = masks[0]->width, h = masks[0]->height;
  std::vector<float> data;
  data.reserve(masks.size() * w * h);
  for (const LabelMask* m : masks) {
    if (m->width != w || m->height != h) throw DataError("masks in a batch must share extents");
    for (auto c : m->classes) data.push_back(static_cast<float>(class_weights.at(c)));
  }
  return Tensor({masks.size(), h, w}, std::move(data));
}

std::vector<LabelMask> predict_items(const UNet& model, std::span<const DatasetItem> items,
                                     std::size_t batch_size) {
  std::vector<LabelMask> out;
  out.reserve(items.size());
  batch_size = std::max<std::size_t>(1, batch_size);
  for (std::size_t b = 0; b < items.size(); b += batch_size) {
    std::vector<std::size_t> idx(std::min(batch_size, items.size() - b));
    std::iota(idx.begin(), idx.end(), b);
    for (auto& m : model.predict(batch_images(items, idx))) out.push_back(std::move(m));
  }
  return out;
}

DatasetMetrics evaluate_model(const UNet& model, std::span<const DatasetItem> items,
                              std::size_t batch_size) {
  const auto preds = predict_items(model, items, batch_size);
  std::vector<LabelMask> truths;
  std::vector<std::string> ids;
  for (const auto& it : items) {
    truths.push_back(it.mask);
    ids.push_back(it.id);
  }
  return evaluate_dataset(preds, truths, ids);
}

std::optional<double> selection_score(const DatasetMetrics& m) { return m.micro.mean_iou; }

TrainResult train(UNet model, const Dataset& data, const TrainConfig& config, std::int64_t start_epoch) {
  config.validate();
  if (data.train.empty()) throw DataError("training set is empty");
  if (data.validation.empty()) throw DataError("validation set is empty");

  auto optimizer = make_optimizer(config.optimizer, config.learning_rate);
  TrainResult result{model, model.clone(), {}, std::nullopt, start_epoch, start_epoch};
  UNet& net = result.model;

  std::vector<std::size_t> order(data.train.size());
  for (std::size_t e = 0; e < config.epochs; ++e) {
    const std::int64_t epoch = start_epoch + static_cast<std::int64_t>(e) + 1;
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed({config.seed, 0x65706f6368ULL, static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::span<const std::size_t> idx(order.data() + b, std::min(config.batch_size, order.size() - b));
      const Tensor images = batch_images(data.train, idx);
      std::vector<const LabelMask*> masks;
      std::vector<std::uint8_t> labels;
      for (auto i : idx) {
        masks.push_back(&data.train[i].mask);
        labels.insert(labels.end(), data.train[i].mask.classes.begin(), data.train[i].mask.classes.end());
      }
      const Tensor weights = pixel_weights(masks, config.class_weights);
      Rng dropout_rng(derive_seed({config.seed, static_cast<std::uint64_t>(epoch), batches}));
      try {
        const Tensor logits = net.logits(images, true, &dropout_rng);
        Tensor loss = ops::softmax_cross_entropy(logits, labels, weights);
        if (!std::isfinite(loss.item())) throw NumericError("loss is " + fmt(loss.item()));
        net.zero_grad();
        loss.backward();
        optimizer->step(net.parameters());
        for (const auto& p : net.parameters()) check_finite<float>(p.data(), "updated parameter");
        loss_sum += loss.item();
      } catch (const NumericError& err) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches) + ": " + err.what());
      }
      ++batches;
    }

    HistoryRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(batches);
    const bool validate = e + 1 == config.epochs || (e + 1) % config.validate_every == 0;
    if (validate) {
      const auto metrics = evaluate_model(net, data.validation, config.batch_size);
      row.val_mean_iou = selection_score(metrics);
      row.val_iou = metrics.micro.iou;
      if (row.val_mean_iou && (!result.best_val_mean_iou || *row.val_mean_iou > *result.best_val_mean_iou)) {
        result.best_val_mean_iou = row.val_mean_iou;
        result.best_epoch = epoch;
        result.best_model = net.clone();
        TrainingMetadata meta{epoch, config.seed, {{"val_mean_iou", *row.val_mean_iou}}};
        save_named(result.best_model, meta, config.checkpoint_dir, "best.ckpt");
      }
    }
    if (config.checkpoint_every > 0 && (e + 1) % config.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04lld.ckpt", static_cast<long long>(epoch));
      save_named(net, {epoch, config.seed, {}}, config.checkpoint_dir, name);
    }
    result.history.push_back(row);
    result.last_epoch = epoch;
    if (config.on_epoch) config.on_epoch(row);
  }
  if (config.epochs > 0) {
    TrainingMetadata meta{result.last_epoch, config.seed, {}};
    if (result.history.back().val_mean_iou) meta.metrics["val_mean_iou"] = *result.history.back().val_mean_iou;
    save_named(net, meta, config.checkpoint_dir, "last.ckpt");
  }
  return result;
}

void write_history_csv(std::span<const HistoryRow> history, std::ostream& out) {
  out << "epoch,train_loss,val_mean_iou";
  for (std::size_t k = 0; k < kNumClasses; ++k) out << ",val_iou_" << k;
  out << '\n';
  for (const auto& r : history) {
    out << r.epoch << ',' << fmt(r.train_loss) << ',' << fmt_opt(r.val_mean_iou);
    for (const auto& v : r.val_iou) out << ',' << fmt_opt(v);
    out << '\n';
  }
}

TrainResult continue_training(const LoadedCheckpoint& checkpoint, const UNetConfig& expected,
                              const Dataset& data, const TrainConfig& config) {
  if (!(checkpoint.model.config() == expected))
    throw ConfigError("checkpoint network config (phi " + checkpoint.model.config().phi.str() +
                      ", delta " + fmt(checkpoint.model.config().delta) +
                      ") is incompatible with the requested config (phi " + expected.phi.str() +
                      ", delta " + fmt(expected.delta) + ")");
  return train(checkpoint.model.clone(), data, config, checkpoint.metadata.epoch);
}

void GridSpec::validate() const {
  if (phis.empty() || batch_sizes.empty()) throw ConfigError("grid axes must be non-empty");
  for (auto b : batch_sizes)
    if (b == 0) throw ConfigError("grid batch sizes must be >= 1");
}

GridResult grid_search(const GridSpec& grid, const UNetConfig& base_net, const TrainConfig& base_train,
                       const Dataset& data) {
  grid.validate();
  GridResult out;
  for (const auto& phi : grid.phis) {
    for (auto batch : grid.batch_sizes) {
      GridCell cell{phi, batch, std::nullopt, {}};
      try {
        UNetConfig net = base_net;
        net.phi = phi;
        TrainConfig tc = base_train;
        tc.batch_size = batch;
        tc.epochs = grid.epochs;
        tc.checkpoint_dir.clear();
        tc.checkpoint_every = 0;
        auto result = train(UNet::build(net, tc.seed), data, tc);
        cell.max_val_mean_iou = result.best_val_mean_iou;
        if (!cell.max_val_mean_iou) cell.error = "no validation score";
      } catch (const Error& e) {
        cell.error = std::string(category_name(e.category())) + ": " + e.what();
      }
      out.cells.push_back(cell);
      const auto& c = out.cells.back();
      if (c.max_val_mean_iou &&
          (!out.best || *c.max_val_mean_iou > *out.cells[*out.best].max_val_mean_iou))
        out.best = out.cells.size() - 1;
    }
  }
  return out;
}

void write_grid_csv(const GridResult& grid, std::ostream& out) {
  out << "phi,batch_size,max_val_mean_iou,status\n";
  auto status = [](const GridCell& c) {
    std::string s = c.error.empty() ? "ok" : "failed: " + c.error;
    for (auto& ch : s)
      if (ch == ',' || ch == '\n') ch = ';';
    return s;
  };
  for (const auto& c : grid.cells)
    out << c.phi.str() << ',' << c.batch_size << ',' << fmt_opt(c.max_val_mean_iou) << ','
        << status(c) << '\n';
  if (grid.best) {
    const auto& c = grid.cells[*grid.best];
    out << "argmax," << c.phi.str() << '/' << c.batch_size << ',' << fmt_opt(c.max_val_mean_iou)
        << ",best\n";
  } else {
    out << "argmax,,,none\n";
  }
}

std::function<double(const Point2&)> class_weight_objective(const UNetConfig& net,
                                                            const TrainConfig& train_config,
                                                            const Dataset& data) {
  return [net, train_config, &data](const Point2& w) {
    TrainConfig tc = train_config;
    tc.checkpoint_dir.clear();
    tc.checkpoint_every = 0;
    tc.class_weights[class_index(WearClass::kAdhesiveWear)] = w[0];
    tc.class_weights[class_index(WearClass::kSurfaceSpalling)] = w[1];
    const auto result = train(UNet::build(net, tc.seed), data, tc);
    double best = 0.0;
    for (const auto& row : result.history)
      if (const auto& v = row.val_iou[class_index(WearClass::kAdhesiveWear)]) best = std::max(best, *v);
    return best;
  };
}

void write_bayes_csv(const BayesResult& result, std::ostream& out) {
  out << "iteration,weight_adhesive,weight_spalling,value,incumbent,phase,length_scale\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const auto& r = result.trace[i];
    out << i << ',' << fmt(r.point[0]) << ',' << fmt(r.point[1]) << ',' << fmt(r.value) << ','
        << fmt(r.incumbent) << ',' << (r.initial ? "initial" : "acquisition") << ','
        << fmt(r.length_scale) << '\n';
  }
}

}  // namespace wearseg

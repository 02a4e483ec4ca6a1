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

#include "commands.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <numbers>
#include <sstream>

#include "wearseg/acquisition.hpp"
#include "wearseg/dataset_dir.hpp"
#include "wearseg/metrics.hpp"
#include "wearseg/synth.hpp"
#include "wearseg/training.hpp"
#include "wearseg/version.hpp"

namespace wearseg::cli {
namespace fs = std::filesystem;

namespace {

fs::path out_dir(const Invocation& inv) {
  const fs::path dir = inv.config.str("run.out_dir");
  if (dir.empty()) throw ConfigError("run.out_dir must not be empty");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void close_out(std::ofstream& f, const fs::path& path) {
  f.close();
  if (!f) throw IoError("write failed for " + path.string());
}

void write_manifest(const Invocation& inv, const fs::path& dir) {
  const fs::path path = dir / "run_manifest.txt";
  auto f = open_out(path);
  f << manifest_text(inv);
  close_out(f, path);
}

fs::path require_path(const RunConfig& c, const std::string& key, const char* flag) {
  const auto p = c.path(key);
  if (!p) throw ConfigError(std::string("missing ") + flag + " (config key " + key + ")");
  return *p;
}

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw IoError(what + " not found: " + p.string());
}

ClassPalette palette_of(const RunConfig& c) {
  const auto p = c.path("data.palette");
  if (!p) return ClassPalette::standard();
  require_exists(*p, "palette file");
  return ClassPalette::load(*p);
}

fs::path data_dir(const RunConfig& c) {
  const fs::path dir = require_path(c, "data.dir", "--data");
  require_exists(dir / "split.tsv", "split manifest");
  return dir;
}

fs::path checkpoint_path(const RunConfig& c) {
  const fs::path p = require_path(c, "model.checkpoint", "--checkpoint");
  require_exists(p, "checkpoint");
  return p;
}

Dataset load_training_data(const RunConfig& c, const fs::path& dir, const UNetConfig& net,
                           bool augment) {
  Dataset d = read_dataset(dir, palette_of(c), c.extent_policy(), net.spatial_multiple());
  if (augment) d.train = expand_dataset(d.train, c.augment());
  return d;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? fmt("%.6f", *v) : "n/a"; }

void print_epoch(const HistoryRow& row) {
  std::printf("epoch %4lld  loss %.6f  val_mean_iou %s\n", static_cast<long long>(row.epoch),
              row.train_loss, opt(row.val_mean_iou).c_str());
  std::fflush(stdout);
}

void write_history(const TrainResult& r, const fs::path& dir) {
  const fs::path path = dir / "history.csv";
  auto f = open_out(path);
  write_history_csv(r.history, f);
  close_out(f, path);
}

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    require_exists(in, "input");
    if (!fs::is_directory(in)) {
      out.push_back(in);
      continue;
    }
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(in)) {
      if (!e.is_regular_file()) continue;
      const auto ext = e.path().extension().string();
      const auto stem = e.path().stem().string();
      const bool mask = stem.size() >= 5 && stem.compare(stem.size() - 5, 5, "_mask") == 0;
      if ((ext == ".png" || ext == ".pgm") && !mask) found.push_back(e.path());
    }
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  if (out.empty()) throw DataError("no input images found");
  return out;
}

}  // namespace

std::string manifest_text(const Invocation& inv) {
  std::ostringstream m;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, inv.config.hash());
  m << "command = " << inv.command << '\n';
  m << "wearseg_version = " << kVersion << '\n';
  m << "checkpoint_format = " << kCheckpointVersion << '\n';
  m << "compiler = " << __VERSION__ << '\n';
  m << "config_hash = fnv1a64:" << hash << '\n';
  m << "seed = " << inv.config.str("run.seed") << '\n';
  m << "argv =";
  for (const auto& a : inv.argv) m << ' ' << a;
  m << "\n\n# effective configuration\n" << inv.config.canonical_text();
  return m.str();
}

int run_synth(const Invocation& inv) {
  const RunConfig& c = inv.config;
  const auto spec = c.synthetic();
  const std::size_t count = c.count("synth.count");
  const auto fractions = c.split_fractions();
  const auto strategy = parse_split_strategy(c.str("data.split_strategy"));
  const std::size_t frames = c.count("synth.sequence_frames");
  const auto seq = frames > 0 ? std::optional(c.sequence()) : std::nullopt;
  const ClassPalette palette = palette_of(c);
  const std::uint64_t seed = c.u64("run.seed");
  const fs::path dir = out_dir(inv);

  const auto gen = make_synthetic_dataset(spec, count, fractions, seed, strategy);
  const DatasetSplit& split = gen.split;
  std::map<std::string, Subset> subset_of;
  for (auto s : {Subset::kTrain, Subset::kValidation, Subset::kTest})
    for (const auto& id : split.subset(s)) subset_of[id] = s;

  write_dataset(dir, gen.data, palette);
  {
    const fs::path path = dir / "palette.txt";
    auto f = open_out(path);
    f << palette.to_text();
    close_out(f, path);
  }
  {
    const fs::path path = dir / "synth.csv";
    auto f = open_out(path);
    f << "id,subset,wear_level\n";
    for (std::size_t i = 0; i < count; ++i)
      f << gen.ids[i] << ',' << subset_name(subset_of.at(gen.ids[i])) << ','
        << fmt("%.6f", gen.wear_levels[i]) << '\n';
    close_out(f, path);
  }
  std::printf("wrote %zu images to %s (train %zu, validation %zu, test %zu)\n", count,
              dir.string().c_str(), split.train.size(), split.validation.size(), split.test.size());

  if (seq) {
    const fs::path sdir = dir / "sequence";
    synth::SyntheticSpec s = spec;
    s.seed = derive_seed({seed, 0x73657175656e6365ULL});
    std::vector<SequenceEntry> entries;
    synth::generate_sequence(*seq, s, [&](const synth::Frame& f) {
      char id[40];
      std::snprintf(id, sizeof id, "stroke_%09" PRIu64, f.stroke);
      write_item(sdir, {id, f.sample.image, f.sample.mask}, palette);
      entries.push_back({f.stroke, fs::path("images") / (std::string(id) + ".png"),
                         fs::path("masks") / (std::string(id) + ".png")});
    });
    write_sequence_manifest(entries, sdir / "sequence.csv");
    std::printf("wrote %zu sequence frames to %s\n", entries.size(), sdir.string().c_str());
  }
  write_manifest(inv, dir);
  return 0;
}

int run_augment(const Invocation& inv) {
  const RunConfig& c = inv.config;
  const fs::path src = data_dir(c);
  const auto spec = c.augment();
  const ClassPalette palette = palette_of(c);
  const fs::path dir = out_dir(inv);
  if (fs::equivalent(src, dir)) throw ConfigError("--out-dir must differ from --data");

  Dataset d = read_dataset(src, palette, c.extent_policy(), 1);
  const std::size_t before = d.train.size();
  d.train = expand_dataset(d.train, spec);
  write_dataset(dir, d, palette);
  std::printf("augmented %zu training images to %zu\n", before, d.train.size());
  write_manifest(inv, dir);
  return 0;
}

int run_train(const Invocation& inv) {
  const RunConfig& c = inv.config;
  const auto net = c.net();
  TrainConfig tc = c.train();
  const fs::path data = data_dir(c);
  const fs::path dir = out_dir(inv);
  const Dataset d = load_training_data(c, data, net, c.flag("train.augment"));

  tc.checkpoint_dir = dir;
  tc.on_epoch = print_epoch;
  const auto result = train(UNet::build(net, tc.seed), d, tc);
  write_history(result, dir);
  std::printf("best val_mean_iou %s at epoch %lld\n", opt(result.best_val_mean_iou).c_str(),
              static_cast<long long>(result.best_epoch));
  write_manifest(inv, dir);
  return 0;
}

int run_continue(const Invocation& inv) {
  const RunConfig& c = inv.config;
  const auto net = c.net();
  TrainConfig tc = c.train();
  const fs::path ckpt = checkpoint_path(c);
  const fs::path data = data_dir(c);
  const fs::path dir = out_dir(inv);
  const auto loaded = load_checkpoint(ckpt);
  const Dataset d = load_training_data(c, data, net, c.flag("train.augment"));

  tc.checkpoint_dir = dir;
  tc.on_epoch = print_epoch;
  const auto result = continue_training(loaded, net, d, tc);
  write_history(result, dir);
  std::printf("continued from epoch %lld to %lld; best val_mean_iou %s\n",
              static_cast<long long>(loaded.metadata.epoch),
              static_cast<long long>(result.last_epoch), opt(result.best_val_mean_iou).c_str());
  write_manifest(inv, dir);
  return 0;
}

int run_eval(const Invocation& inv) {
  const RunConfig& c = inv.config;
  const fs::path ckpt = checkpoint_path(c);
  const fs::path data = data_dir(c);
  const Subset subset = parse_subset(c.str("eval.subset"));
  const std::size_t batch = c.count("train.batch_size");
  const ClassPalette palette = palette_of(c);
  const fs::path dir = out_dir(inv);
  const auto loaded = load_checkpoint(ckpt);

  const DatasetSplit split = read_split_manifest(data / "split.tsv");
  const auto items = read_items(data, split.subset(subset), palette, c.extent_policy(),
                                loaded.model.config().spatial_multiple());
  if (items.empty()) throw DataError(std::string(subset_name(subset)) + " subset is empty");
  const auto metrics = evaluate_model(loaded.model, items, std::max<std::size_t>(batch, 1));
  const fs::path path = dir / "metrics.csv";
  auto f = open_out(path);
  write_metrics_csv(metrics, f);
  close_out(f, path);
  std::printf("%s: %zu images, mean_iou %s (micro), %s (macro)\n", subset_name(subset),
              items.size(), opt(metrics.micro.mean_iou).c_str(),
              opt(metrics.macro_mean_iou).c_str());
  for (std::size_t k = 0; k < kNumClasses; ++k)
    std::printf("  iou_%zu %s\n", k, opt(metrics.micro.iou[k]).c_str());
  write_manifest(inv, dir);
  return 0;
}

int run_predict(const Invocation& inv) {
  const RunConfig& c = inv.config;
  const fs::path ckpt = checkpoint_path(c);
  const auto inputs = expand_inputs(inv.inputs);
  const ExtentPolicy policy = c.extent_policy();
  const ClassPalette palette = palette_of(c);
  const fs::path dir = out_dir(inv);
  const auto loaded = load_checkpoint(ckpt);
  const std::size_t multiple = loaded.model.config().spatial_multiple();

  for (const auto& in : inputs) {
    const GrayImage image = read_gray_image(in);
    if (policy == ExtentPolicy::kKeep && (image.width % multiple || image.height % multiple)) {
      throw ConfigError(in.string() + ": extent " + std::to_string(image.width) + "x" +
                        std::to_string(image.height) + " is not a multiple of " +
                        std::to_string(multiple) + "; set data.extent_policy = pad or crop");
    }
  }
  for (const auto& in : inputs) {
    const auto img = load_image(in, policy, multiple);
    const auto masks = loaded.model.predict(img.tensor);
    const LabelMask mask = restore_mask(masks.front(), img.crop);
    const fs::path target = in.parent_path() / (in.stem().string() + "_mask.png");
    write_rgb_png(encode_mask(mask, palette), target);
    std::printf("%s -> %s\n", in.string().c_str(), target.string().c_str());
  }
  write_manifest(inv, dir);
  return 0;
}

int run_series(const Invocation& inv) {
  const RunConfig& c = inv.config;
  const fs::path ckpt = checkpoint_path(c);
  const fs::path sdir = require_path(c, "series.sequence_dir", "--sequence");
  require_exists(sdir / "sequence.csv", "sequence manifest");
  const std::size_t cls = c.count("series.class");
  if (cls >= kNumClasses) throw ConfigError("series.class must be below " + std::to_string(kNumClasses));
  const std::size_t window = c.count("series.window");
  const ExtentPolicy policy = c.extent_policy();
  const ClassPalette palette = palette_of(c);
  const fs::path dir = out_dir(inv);
  const auto entries = read_sequence_manifest(sdir / "sequence.csv");
  if (entries.empty()) throw DataError("sequence manifest lists no frames");
  for (const auto& e : entries) require_exists(sdir / e.image, "sequence frame");
  const auto loaded = load_checkpoint(ckpt);
  const std::size_t multiple = loaded.model.config().spatial_multiple();

  std::vector<std::uint64_t> strokes;
  std::vector<LabelMask> predicted;
  std::vector<std::optional<std::uint64_t>> truth;
  for (const auto& e : entries) {
    const auto img = load_image(sdir / e.image, policy, multiple);
    predicted.push_back(restore_mask(loaded.model.predict(img.tensor).front(), img.crop));
    strokes.push_back(e.stroke);
    if (!e.mask.empty() && fs::exists(sdir / e.mask)) {
      const LabelMask m = decode_mask(read_rgb_png(sdir / e.mask), palette);
      truth.push_back(static_cast<std::uint64_t>(std::count(m.classes.begin(), m.classes.end(), cls)));
    } else {
      truth.emplace_back();
    }
  }
  const auto series = pixel_count_series(strokes, predicted, cls, window);

  const fs::path path = dir / "series.csv";
  auto f = open_out(path);
  f << "stroke,class,count,smoothed,truth_count\n";
  std::vector<double> a, b;
  for (std::size_t i = 0; i < series.size(); ++i) {
    f << series[i].stroke << ',' << cls << ',' << series[i].count << ','
      << fmt("%.6f", series[i].smoothed) << ',';
    if (truth[i]) {
      f << *truth[i];
      a.push_back(static_cast<double>(series[i].count));
      b.push_back(static_cast<double>(*truth[i]));
    }
    f << '\n';
  }
  close_out(f, path);
  std::printf("%zu frames, class %zu\n", series.size(), cls);
  if (a.size() == series.size()) std::printf("pearson vs truth %s\n", opt(pearson(a, b)).c_str());
  write_manifest(inv, dir);
  return 0;
}

int run_grid(const Invocation& inv) {
  const RunConfig& c = inv.config;
  const auto net = c.net();
  const auto grid = c.grid();
  const TrainConfig tc = c.train();
  const fs::path data = data_dir(c);
  const fs::path dir = out_dir(inv);
  Rational smallest = grid.phis.front();
  for (const auto& p : grid.phis) if (p.value() < smallest.value()) smallest = p;
  UNetConfig probe = net;
  probe.phi = smallest;
  const Dataset d = load_training_data(c, data, probe, c.flag("train.augment"));

  const auto result = grid_search(grid, net, tc, d);
  const fs::path path = dir / "grid.csv";
  auto f = open_out(path);
  write_grid_csv(result, f);
  close_out(f, path);
  for (const auto& cell : result.cells) {
    std::printf("phi %-5s batch %2zu  %s%s\n", cell.phi.str().c_str(), cell.batch_size,
                opt(cell.max_val_mean_iou).c_str(), cell.error.empty() ? "" : ("  " + cell.error).c_str());
  }
  write_manifest(inv, dir);
  return 0;
}

int run_bayes(const Invocation& inv) {
  const RunConfig& c = inv.config;
  const auto net = c.net();
  const auto spec = c.bayes();
  TrainConfig tc = c.train();
  tc.epochs = c.count("bayes.epochs");
  tc.validate();
  const fs::path data = data_dir(c);
  const fs::path dir = out_dir(inv);
  const Dataset d = load_training_data(c, data, net, c.flag("train.augment"));

  const auto objective = class_weight_objective(net, tc, d);
  std::size_t evaluation = 0;
  const auto result = bayes_opt(spec, [&](const Point2& w) {
    const double v = objective(w);
    std::printf("eval %2zu  weight_adhesive %.4f  weight_spalling %.4f  iou_5 %.6f\n", ++evaluation,
                w[0], w[1], v);
    std::fflush(stdout);
    return v;
  });
  const fs::path path = dir / "bayes.csv";
  auto f = open_out(path);
  write_bayes_csv(result, f);
  close_out(f, path);
  std::printf("best weight_adhesive %.4f weight_spalling %.4f iou_5 %.6f\n", result.best_point[0],
              result.best_point[1], result.best_value);
  write_manifest(inv, dir);
  return 0;
}

int run_timing(const Invocation& inv) {
  const RunConfig& c = inv.config;
  const auto base = c.kinematics();
  const auto targets = c.reals("timing.targets_um");
  const double fov = c.real("timing.field_of_view_mm") * 1e-3;
  const double width = c.real("timing.image_width_px");
  if (!(fov > 0.0) || !(width > 0.0))
    throw ConfigError("timing.field_of_view_mm and timing.image_width_px must be positive");
  const fs::path dir = out_dir(inv);

  const fs::path path = dir / "timing.csv";
  auto f = open_out(path);
  f << "target_um,trigger_offset_deg,displacement_um,blur_px,status\n";
  std::printf("%10s %12s %15s %9s\n", "target_um", "offset_deg", "displacement_um", "blur_px");
  auto row = [&](const std::string& label, const acquisition::PressKinematics& k) {
    const double deg = k.trigger_offset * 180.0 / std::numbers::pi;
    const double disp = acquisition::exposure_displacement(k) * 1e6;
    const double blur = acquisition::blur_in_pixels(k, fov, width);
    f << label << ',' << fmt("%.4f", deg) << ',' << fmt("%.6f", disp) << ',' << fmt("%.4f", blur)
      << ",ok\n";
    std::printf("%10s %12.4f %15.6f %9.4f\n", label.c_str(), deg, disp, blur);
  };
  row("tdc", base);
  for (double t : targets) {
    const std::string label = fmt("%g", t);
    acquisition::PressKinematics k = base;
    try {
      k.trigger_offset = acquisition::solve_trigger_offset(base, t * 1e-6);
    } catch (const RangeError& e) {
      f << label << ",,,,unreachable\n";
      std::printf("%10s  unreachable: %s\n", label.c_str(), e.what());
      continue;
    }
    row(label, k);
  }
  close_out(f, path);
  write_manifest(inv, dir);
  return 0;
}

}  // namespace wearseg::cli

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

#include "wearseg/dataset_dir.hpp"

#include "wearseg/rng.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace wearseg {

std::filesystem::path image_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / "images" / (id + ".png");
}

std::filesystem::path mask_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / "masks" / (id + ".png");
}

void write_item(const std::filesystem::path& dir, const DatasetItem& item,
                const ClassPalette& palette) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  std::filesystem::create_directories(dir / "masks", ec);
  if (ec) throw IoError("cannot create dataset folders under " + dir.string() + ": " + ec.message());
  write_gray_png(item.image, image_path(dir, item.id));
  write_rgb_png(encode_mask(item.mask, palette), mask_path(dir, item.id));
}

DatasetItem read_item(const std::filesystem::path& dir, const std::string& id,
                      const ClassPalette& palette, ExtentPolicy policy, std::size_t multiple) {
  const auto ipath = image_path(dir, id);
  const auto mpath = mask_path(dir, id);
  const GrayImage image = read_gray_image(ipath);
  const LabelMask mask = decode_mask(read_rgb_png(mpath), palette);
  if (mask.width != image.width || mask.height != image.height) {
    throw DataError(mpath.string() + ": mask is " + std::to_string(mask.width) + "x" +
                    std::to_string(mask.height) + " but image is " + std::to_string(image.width) +
                    "x" + std::to_string(image.height));
  }
  if (policy == ExtentPolicy::kKeep &&
      (image.width % multiple != 0 || image.height % multiple != 0)) {
    throw ConfigError(ipath.string() + ": extent " + std::to_string(image.width) + "x" +
                      std::to_string(image.height) + " is not a multiple of " +
                      std::to_string(multiple) + "; set data.extent_policy = pad or crop");
  }
  AdjustedImage adjusted = adjust_extents(image, policy, multiple);
  LabelMask adjusted_mask =
      adjust_mask(mask, adjusted.crop, adjusted.image.width, adjusted.image.height);
  return {id, std::move(adjusted.image), std::move(adjusted_mask)};
}

std::vector<DatasetItem> read_items(const std::filesystem::path& dir,
                                    std::span<const std::string> ids, const ClassPalette& palette,
                                    ExtentPolicy policy, std::size_t multiple) {
  std::vector<DatasetItem> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(read_item(dir, id, palette, policy, multiple));
  return out;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& data,
                   const ClassPalette& palette) {
  DatasetSplit split;
  auto add = [&](const std::vector<DatasetItem>& items, std::vector<std::string>& ids) {
    for (const auto& item : items) {
      write_item(dir, item, palette);
      ids.push_back(item.id);
    }
  };
  add(data.train, split.train);
  add(data.validation, split.validation);
  add(data.test, split.test);
  write_split_manifest(split, dir / "split.tsv");
}

Dataset read_dataset(const std::filesystem::path& dir, const ClassPalette& palette,
                     ExtentPolicy policy, std::size_t multiple) {
  const DatasetSplit split = read_split_manifest(dir / "split.tsv");
  Dataset d;
  d.train = read_items(dir, split.train, palette, policy, multiple);
  d.validation = read_items(dir, split.validation, palette, policy, multiple);
  d.test = read_items(dir, split.test, palette, policy, multiple);
  return d;
}

SyntheticDataset make_synthetic_dataset(const synth::SyntheticSpec& base, std::size_t count,
                                        std::array<double, 3> fractions, std::uint64_t seed,
                                        SplitStrategy strategy) {
  if (count == 0) throw ConfigError("synthetic dataset needs at least one image");
  SyntheticDataset out;
  std::map<std::string, DatasetItem> items;
  for (std::size_t i = 0; i < count; ++i) {
    synth::SyntheticSpec s = base;
    s.seed = derive_seed({seed, i});
    s.wear_level = Rng(derive_seed({seed, i, 0x77656172ULL})).uniform();
    char id[32];
    std::snprintf(id, sizeof id, "syn_%04zu", i);
    auto sample = synth::generate(s);
    items[id] = {id, std::move(sample.image), std::move(sample.mask)};
    out.ids.push_back(id);
    out.wear_levels.push_back(s.wear_level);
  }
  out.split = split_dataset(out.ids, fractions, seed, strategy);
  auto take = [&](const std::vector<std::string>& ids, std::vector<DatasetItem>& dst) {
    for (const auto& id : ids) dst.push_back(items.at(id));
  };
  take(out.split.train, out.data.train);
  take(out.split.validation, out.data.validation);
  take(out.split.test, out.data.test);
  return out;
}

void write_sequence_manifest(std::span<const SequenceEntry> entries,
                             const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << "stroke,image,mask\n";
  for (const auto& e : entries) {
    f << e.stroke << ',' << e.image.generic_string() << ',' << e.mask.generic_string() << '\n';
  }
  if (!f) throw IoError("write failed for " + path.string());
}

std::vector<SequenceEntry> read_sequence_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open sequence manifest " + path.string());
  std::vector<SequenceEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("stroke,", 0) == 0) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    std::stringstream ss(line);
    std::string stroke, image, mask;
    if (!std::getline(ss, stroke, ',') || !std::getline(ss, image, ',')) {
      throw DataError(where + ": expected 'stroke,image,mask'");
    }
    std::getline(ss, mask, ',');
    if (stroke.empty() || stroke.find_first_not_of("0123456789") != std::string::npos) {
      throw DataError(where + ": stroke '" + stroke + "' is not a non-negative integer");
    }
    SequenceEntry e{std::stoull(stroke), image, mask};
    if (!out.empty() && e.stroke <= out.back().stroke) {
      throw DataError(where + ": strokes must be strictly increasing");
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace wearseg

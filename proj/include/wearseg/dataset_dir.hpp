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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wearseg/augment.hpp"
#include "wearseg/dataio.hpp"
#include "wearseg/synth.hpp"
#include "wearseg/training.hpp"

// Directory layout shared by the command line and the bindings:
//
//   <dir>/images/<id>.png   8-bit grayscale
//   <dir>/masks/<id>.png    palette-encoded RGB
//   <dir>/split.tsv         id<TAB>subset
//   <dir>/sequence.csv      stroke,image,mask (paths relative to <dir>)
namespace wearseg {

std::filesystem::path image_path(const std::filesystem::path& dir, const std::string& id);
std::filesystem::path mask_path(const std::filesystem::path& dir, const std::string& id);

/// Writes images/<id>.png and masks/<id>.png, creating the folders.
void write_item(const std::filesystem::path& dir, const DatasetItem& item,
                const ClassPalette& palette);

/// Reads one pair and applies the extent policy to both. With kKeep, extents
/// that are not multiples of `multiple` are a ConfigError naming the file.
DatasetItem read_item(const std::filesystem::path& dir, const std::string& id,
                      const ClassPalette& palette, ExtentPolicy policy, std::size_t multiple);

std::vector<DatasetItem> read_items(const std::filesystem::path& dir,
                                    std::span<const std::string> ids, const ClassPalette& palette,
                                    ExtentPolicy policy, std::size_t multiple);

/// Writes every item plus split.tsv.
void write_dataset(const std::filesystem::path& dir, const Dataset& data,
                   const ClassPalette& palette);
Dataset read_dataset(const std::filesystem::path& dir, const ClassPalette& palette,
                     ExtentPolicy policy = ExtentPolicy::kKeep, std::size_t multiple = 16);

/// A generated dataset: `count` images with ids syn_0000.., each drawn from
/// `base` with its own seed and a uniform random wear level, then split.
struct SyntheticDataset {
  Dataset data;
  DatasetSplit split;
  std::vector<std::string> ids;    // generation order
  std::vector<double> wear_levels; // parallel to ids
};

SyntheticDataset make_synthetic_dataset(const synth::SyntheticSpec& base, std::size_t count,
                                        std::array<double, 3> fractions, std::uint64_t seed,
                                        SplitStrategy strategy = SplitStrategy::kEquidistant);

struct SequenceEntry {
  std::uint64_t stroke = 0;
  std::filesystem::path image;  // relative to the sequence directory
  std::filesystem::path mask;
};

void write_sequence_manifest(std::span<const SequenceEntry> entries,
                             const std::filesystem::path& path);
/// DataError on a malformed row or non-increasing strokes.
std::vector<SequenceEntry> read_sequence_manifest(const std::filesystem::path& path);

}  // namespace wearseg

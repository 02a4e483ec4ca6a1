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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "support/datasets.hpp"
#include "wearseg/dataset_dir.hpp"
#include "wearseg/run_config.hpp"

namespace wearseg {
namespace {

namespace fs = std::filesystem;

template <typename Fn>
std::string config_error(Fn fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected ConfigError";
  return {};
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("wearseg_runcfg_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Fnv1a, PublishedTestVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(RunConfig, DefaultsBuildValidSpecs) {
  const RunConfig c;
  EXPECT_EQ(c.net().phi, (Rational{1, 16}));
  EXPECT_DOUBLE_EQ(c.net().delta, 0.48);
  EXPECT_DOUBLE_EQ(c.train().learning_rate, 5.4e-4);
  EXPECT_EQ(c.train().batch_size, 4u);
  EXPECT_EQ(c.train().epochs, 60u);
  EXPECT_EQ(c.augment().copies_per_image, 2u);
  EXPECT_EQ(c.synthetic().width, 64u);
  EXPECT_EQ(c.grid().phis.size(), 4u);
  EXPECT_EQ(c.bayes().initial_samples + c.bayes().iterations, 25u);
  EXPECT_EQ(c.extent_policy(), ExtentPolicy::kKeep);
  const auto k = c.kinematics();
  EXPECT_DOUBLE_EQ(k.stroke_length, 0.035);
  EXPECT_DOUBLE_EQ(k.exposure, 50e-6);
}

TEST(RunConfig, GrammarCommentsAndLastAssignmentWins) {
  RunConfig c;
  c.load_text("# header\n\n  net.phi = 1/8   # trailing comment\ntrain.epochs=3\ntrain.epochs = 7\n",
              "inline");
  EXPECT_EQ(c.net().phi, (Rational{1, 8}));
  EXPECT_EQ(c.count("train.epochs"), 7u);
}

TEST(RunConfig, UnknownKeyReportsLocation) {
  RunConfig c;
  const auto msg = config_error([&] { c.load_text("net.phi = 1/16\n\nnet.phy = 2\n", "run.cfg"); });
  EXPECT_NE(msg.find("run.cfg:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("net.phy"), std::string::npos) << msg;
}

TEST(RunConfig, MalformedLinesReportLocation) {
  RunConfig c;
  EXPECT_NE(config_error([&] { c.load_text("net.phi 1/16\n", "a.cfg"); }).find("a.cfg:1"),
            std::string::npos);
  EXPECT_NE(config_error([&] { c.load_text("\nphi = 1\n", "b.cfg"); }).find("b.cfg:2"),
            std::string::npos);
}

TEST(RunConfig, FileLoadingAndMissingFile) {
  const auto dir = scratch("file");
  {
    std::ofstream f(dir / "x.cfg");
    f << "train.batch_size = 8\n";
  }
  RunConfig c;
  c.load_file(dir / "x.cfg");
  EXPECT_EQ(c.train().batch_size, 8u);
  EXPECT_THROW(c.load_file(dir / "missing.cfg"), IoError);
  fs::remove_all(dir);
}

TEST(RunConfig, OverridesApplyAfterFile) {
  RunConfig c;
  c.load_text("train.epochs = 5\n", "f");
  c.apply_override("train.epochs=9");
  EXPECT_EQ(c.count("train.epochs"), 9u);
  EXPECT_NE(config_error([&] { c.apply_override("train.epoch=1"); }).find("train.epoch"),
            std::string::npos);
  EXPECT_THROW(c.apply_override("train.epochs"), ConfigError);
}

TEST(RunConfig, BadValuesNameTheKey) {
  RunConfig c;
  c.apply_override("train.learning_rate=fast");
  EXPECT_NE(config_error([&] { c.train(); }).find("train.learning_rate"), std::string::npos);
  RunConfig d;
  d.apply_override("train.class_weights=1,2,3");
  EXPECT_NE(config_error([&] { d.train(); }).find("train.class_weights"), std::string::npos);
  RunConfig e;
  e.apply_override("net.phi=1/3");
  EXPECT_THROW(e.net(), ConfigError);
  RunConfig f;
  f.apply_override("data.extent_policy=stretch");
  EXPECT_THROW(f.extent_policy(), ConfigError);
  RunConfig g;
  g.apply_override("train.augment=maybe");
  EXPECT_THROW(g.flag("train.augment"), ConfigError);
  RunConfig h;
  h.apply_override("run.seed=-4");
  EXPECT_THROW(h.u64("run.seed"), ConfigError);
}

TEST(RunConfig, HashTracksEffectiveValues) {
  RunConfig a, b;
  EXPECT_EQ(a.hash(), b.hash());
  b.apply_override("run.seed=1");
  EXPECT_NE(a.hash(), b.hash());
  b.apply_override("run.seed=0");
  EXPECT_EQ(a.hash(), b.hash());
  const std::string text = a.canonical_text();
  for (const auto& key : RunConfig::keys())
    EXPECT_NE(text.find(key + " = "), std::string::npos) << key;
}

TEST(RunConfig, CanonicalTextReloadsToSameHash) {
  RunConfig a;
  a.apply_override("net.phi=1/4");
  a.apply_override("synth.cleaning_strokes=100,200");
  a.apply_override("synth.sequence_frames=10");
  RunConfig b;
  b.load_text(a.canonical_text(), "canonical");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(b.sequence().cleaning_strokes, (std::vector<std::uint64_t>{100, 200}));
}

TEST(DatasetDir, RoundTripKeepsSplitAndPixels) {
  const auto dir = scratch("roundtrip");
  const Dataset d = testing::synthetic_dataset(3, 2, 1, 32, 5);
  write_dataset(dir, d, ClassPalette::standard());
  const Dataset back = read_dataset(dir, ClassPalette::standard());
  ASSERT_EQ(back.train.size(), 3u);
  ASSERT_EQ(back.validation.size(), 2u);
  ASSERT_EQ(back.test.size(), 1u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.train[i].id, d.train[i].id);
    EXPECT_EQ(back.train[i].image, d.train[i].image);
    EXPECT_EQ(back.train[i].mask, d.train[i].mask);
  }
  fs::remove_all(dir);
}

TEST(DatasetDir, ExtentContradictionNeedsPadding) {
  const auto dir = scratch("extent");
  DatasetItem item{"odd", GrayImage(40, 24, 100), LabelMask(40, 24, 1)};
  write_item(dir, item, ClassPalette::standard());
  const auto msg = config_error([&] {
    read_item(dir, "odd", ClassPalette::standard(), ExtentPolicy::kKeep, 16);
  });
  EXPECT_NE(msg.find("odd.png"), std::string::npos) << msg;
  EXPECT_NE(msg.find("16"), std::string::npos) << msg;
  const auto padded = read_item(dir, "odd", ClassPalette::standard(), ExtentPolicy::kPadToMultiple, 16);
  EXPECT_EQ(padded.image.width, 48u);
  EXPECT_EQ(padded.image.height, 32u);
  EXPECT_EQ(padded.mask.width, 48u);
  EXPECT_EQ(padded.mask.height, 32u);
  fs::remove_all(dir);
}

TEST(DatasetDir, MaskExtentMismatchIsDataError) {
  const auto dir = scratch("mismatch");
  write_item(dir, {"a", GrayImage(16, 16, 9), LabelMask(16, 16, 0)}, ClassPalette::standard());
  write_rgb_png(encode_mask(LabelMask(32, 16, 0), ClassPalette::standard()), mask_path(dir, "a"));
  EXPECT_THROW(read_item(dir, "a", ClassPalette::standard(), ExtentPolicy::kKeep, 16), DataError);
  fs::remove_all(dir);
}

TEST(DatasetDir, SequenceManifestRoundTripAndOrdering) {
  const auto dir = scratch("sequence");
  const std::vector<SequenceEntry> entries = {{0, "images/a.png", "masks/a.png"},
                                              {500, "images/b.png", "masks/b.png"}};
  write_sequence_manifest(entries, dir / "sequence.csv");
  const auto back = read_sequence_manifest(dir / "sequence.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].stroke, 500u);
  EXPECT_EQ(back[1].image, fs::path("images/b.png"));
  {
    std::ofstream f(dir / "bad.csv");
    f << "stroke,image,mask\n10,a.png,\n10,b.png,\n";
  }
  try {
    read_sequence_manifest(dir / "bad.csv");
    ADD_FAILURE() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv:3"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

}  // namespace
}  // namespace wearseg

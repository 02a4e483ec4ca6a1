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
#include <filesystem>
#include <fstream>
#include <set>

#include "wearseg/dataio.hpp"
#include "wearseg/rng.hpp"

namespace wearseg {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("wearseg_dataio_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

LabelMask random_mask(std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  LabelMask m(w, h);
  for (auto& c : m.classes) c = static_cast<std::uint8_t>(rng.uniform_int(kNumClasses));
  return m;
}

GrayImage ramp(std::size_t w, std::size_t h) {
  GrayImage g(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) g.at(x, y) = static_cast<std::uint8_t>((x * 7 + y * 13) % 256);
  return g;
}

std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("frame" + std::to_string(1000 + i));
  return ids;
}

TEST(Palette, StandardColors) {
  const auto p = ClassPalette::standard();
  EXPECT_EQ(p.entry(0).color, (Rgb{0, 0, 0}));
  EXPECT_EQ(p.entry(1).color, (Rgb{0, 255, 0}));
  EXPECT_EQ(p.entry(2).color, (Rgb{255, 0, 0}));
  EXPECT_EQ(p.entry(3).color, (Rgb{0, 0, 255}));
  EXPECT_EQ(p.entry(4).color, (Rgb{255, 255, 0}));
  EXPECT_EQ(p.entry(5).color, (Rgb{255, 0, 255}));
  EXPECT_EQ(p.entry(5).name, "adhesive_wear");
}

TEST(Palette, TextRoundTripAndValidation) {
  const auto p = ClassPalette::standard();
  const auto q = ClassPalette::parse(p.to_text());
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    EXPECT_EQ(p.entry(k).name, q.entry(k).name);
    EXPECT_EQ(p.entry(k).color, q.entry(k).color);
  }
  // Duplicate color.
  std::string dup = p.to_text();
  dup.replace(dup.find("255 0 255"), 9, "255 255 0");
  EXPECT_THROW(ClassPalette::parse(dup), ConfigError);
  // Missing class.
  EXPECT_THROW(ClassPalette::parse("0 background 0 0 0\n# only one\n"), ConfigError);
  EXPECT_THROW(ClassPalette::parse("7 bogus 1 2 3\n"), ConfigError);
}

TEST(Mask, AllBlackDecodesToBackground) {
  RgbImage rgb(5, 4);
  const auto m = decode_mask(rgb, ClassPalette::standard());
  EXPECT_EQ(m.class_counts()[0], 20u);
}

TEST(Mask, EncodeDecodeRoundTrip) {
  const auto palette = ClassPalette::standard();
  const auto m = random_mask(17, 11, 3);
  const auto rgb = encode_mask(m, palette);
  EXPECT_EQ(decode_mask(rgb, palette), m);
  EXPECT_EQ(encode_mask(decode_mask(rgb, palette), palette), rgb);
}

TEST(Mask, UnknownColorReportsPixel) {
  auto rgb = encode_mask(LabelMask(6, 5, 1), ClassPalette::standard());
  const std::size_t x = 4, y = 2, i = 3 * (y * 6 + x);
  rgb.pixels[i] = 1;
  rgb.pixels[i + 1] = 2;
  rgb.pixels[i + 2] = 3;
  try {
    decode_mask(rgb, ClassPalette::standard());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(4,2)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("1,2,3"), std::string::npos) << msg;
  }
}

TEST(Mask, ClassCountsSumToArea) {
  const auto m = random_mask(23, 9, 8);
  const auto c = m.class_counts();
  std::size_t total = 0;
  for (auto v : c) total += v;
  EXPECT_EQ(total, 23u * 9u);
}

TEST(ImageFiles, PngAndPgmRoundTrip) {
  TempDir dir;
  const auto g = ramp(37, 21);
  write_gray_png(g, dir.path() / "a.png");
  write_pgm(g, dir.path() / "a.pgm");
  EXPECT_EQ(read_gray_image(dir.path() / "a.png"), g);
  EXPECT_EQ(read_gray_image(dir.path() / "a.pgm"), g);
  const auto rgb = encode_mask(random_mask(9, 7, 1), ClassPalette::standard());
  write_rgb_png(rgb, dir.path() / "m.png");
  EXPECT_EQ(read_rgb_png(dir.path() / "m.png"), rgb);
}

TEST(ImageFiles, ColorPngIsNotAGrayImage) {
  TempDir dir;
  write_rgb_png(RgbImage(4, 4), dir.path() / "c.png");
  EXPECT_THROW(read_gray_image(dir.path() / "c.png"), DataError);
}

TEST(ImageFiles, SixteenBitPgmIsRejected) {
  TempDir dir;
  std::ofstream(dir.path() / "deep.pgm", std::ios::binary) << "P5\n2 2\n65535\n" << std::string(8, '\0');
  EXPECT_THROW(read_gray_image(dir.path() / "deep.pgm"), DataError);
  std::ofstream(dir.path() / "junk.png", std::ios::binary) << "not an image";
  EXPECT_THROW(read_gray_image(dir.path() / "junk.png"), DataError);
}

TEST(ImageFiles, MissingFileIsIoError) {
  EXPECT_THROW(read_gray_image("/nonexistent/x.png"), IoError);
}

TEST(LoadImage, ScalesToUnitInterval) {
  TempDir dir;
  write_gray_png(GrayImage(16, 16, 255), dir.path() / "w.png");
  const auto li = load_image(dir.path() / "w.png");
  ASSERT_EQ(li.tensor.shape(), (Shape{1, 1, 16, 16}));
  for (float v : li.tensor.data()) EXPECT_EQ(v, 1.0f);
}

TEST(Extents, DivisibleImageIsUnchanged) {
  const auto g = ramp(1920, 1200);
  const auto a = adjust_extents(g, ExtentPolicy::kPadToMultiple);
  EXPECT_EQ(a.image, g);
  EXPECT_EQ(a.crop.offset_x + a.crop.offset_y + a.crop.source_x + a.crop.source_y, 0u);
}

TEST(Extents, PadsWithEdgeReplication) {
  const auto g = ramp(100, 100);
  const auto a = adjust_extents(g, ExtentPolicy::kPadToMultiple);
  ASSERT_EQ(a.image.width, 112u);
  ASSERT_EQ(a.image.height, 112u);
  EXPECT_EQ(a.crop.original_width, 100u);
  EXPECT_EQ(a.crop.offset_x, 6u);
  EXPECT_EQ(a.crop.offset_y, 6u);
  EXPECT_EQ(a.image.at(6, 6), g.at(0, 0));
  EXPECT_EQ(a.image.at(0, 0), g.at(0, 0));
  EXPECT_EQ(a.image.at(111, 111), g.at(99, 99));
  EXPECT_EQ(a.image.at(50, 0), g.at(44, 0));
  // Restoring a mask recovers the original frame.
  LabelMask m(112, 112);
  for (std::size_t y = 0; y < 112; ++y)
    for (std::size_t x = 0; x < 112; ++x) m.at(x, y) = static_cast<std::uint8_t>((x + y) % 6);
  const auto r = restore_mask(m, a.crop);
  ASSERT_EQ(r.width, 100u);
  EXPECT_EQ(r.at(0, 0), m.at(6, 6));
  EXPECT_EQ(r.at(99, 40), m.at(105, 46));
}

TEST(Extents, CropIsCenteredAndInvertible) {
  const auto g = ramp(70, 37);
  const auto a = adjust_extents(g, ExtentPolicy::kCropToMultiple);
  ASSERT_EQ(a.image.width, 64u);
  ASSERT_EQ(a.image.height, 32u);
  EXPECT_EQ(a.crop.source_x, 3u);
  EXPECT_EQ(a.crop.source_y, 2u);
  EXPECT_EQ(a.image.at(0, 0), g.at(3, 2));
  const auto r = restore_mask(LabelMask(64, 32, 4), a.crop, 0);
  EXPECT_EQ(r.at(3, 2), 4);
  EXPECT_EQ(r.at(0, 0), 0);
  EXPECT_EQ(r.class_counts()[4], 64u * 32u);
  EXPECT_THROW(adjust_extents(ramp(10, 40), ExtentPolicy::kCropToMultiple), ConfigError);
}

TEST(Split, PublishedCountRule) {
  const auto ids = make_ids(309);
  const auto s = split_dataset(ids, {0.6, 0.2, 0.2}, 1);
  EXPECT_EQ(s.train.size(), 187u);
  EXPECT_EQ(s.validation.size(), 61u);
  EXPECT_EQ(s.test.size(), 61u);
  const auto five = split_dataset(make_ids(5), {0.6, 0.2, 0.2}, 1);
  EXPECT_EQ(five.train.size(), 3u);
  EXPECT_EQ(five.validation.size(), 1u);
  EXPECT_EQ(five.test.size(), 1u);
}

TEST(Split, DisjointExhaustiveAndDeterministic) {
  for (auto strategy : {SplitStrategy::kEquidistant, SplitStrategy::kRandom}) {
    const auto ids = make_ids(64);
    const auto a = split_dataset(ids, {0.6, 0.2, 0.2}, 7, strategy);
    const auto b = split_dataset(ids, {0.6, 0.2, 0.2}, 7, strategy);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.validation, b.validation);
    EXPECT_EQ(a.test, b.test);
    std::multiset<std::string> all(a.train.begin(), a.train.end());
    all.insert(a.validation.begin(), a.validation.end());
    all.insert(a.test.begin(), a.test.end());
    EXPECT_EQ(all, std::multiset<std::string>(ids.begin(), ids.end()));
  }
}

TEST(Split, EquidistantHeldOutIsEvenlySpaced) {
  const auto ids = make_ids(100);
  const auto s = split_dataset(ids, {0.6, 0.2, 0.2}, 3);
  std::vector<std::size_t> pos;
  for (const auto* v : {&s.validation, &s.test})
    for (const auto& id : *v) pos.push_back(static_cast<std::size_t>(std::stoul(id.substr(5)) - 1000));
  std::sort(pos.begin(), pos.end());
  ASSERT_EQ(pos.size(), 40u);
  for (std::size_t i = 1; i < pos.size(); ++i) {
    EXPECT_GE(pos[i] - pos[i - 1], 2u);
    EXPECT_LE(pos[i] - pos[i - 1], 3u);
  }
  // Different seeds reshuffle which held-out items go to validation.
  const auto t = split_dataset(ids, {0.6, 0.2, 0.2}, 4);
  EXPECT_EQ(s.train, t.train);
  EXPECT_NE(s.validation, t.validation);
}

TEST(Split, Errors) {
  EXPECT_THROW(split_dataset(make_ids(10), {0.6, 0.2, 0.3}, 0), ConfigError);
  EXPECT_THROW(split_dataset(make_ids(4), {0.6, 0.2, 0.2}, 0), ConfigError);
  std::vector<std::string> dup = make_ids(6);
  dup[3] = dup[0];
  EXPECT_THROW(split_dataset(dup, {0.6, 0.2, 0.2}, 0), DataError);
  EXPECT_THROW(parse_split_strategy("stratified"), ConfigError);
}

TEST(Split, ManifestRoundTrip) {
  TempDir dir;
  const auto s = split_dataset(make_ids(20), {0.6, 0.2, 0.2}, 5);
  write_split_manifest(s, dir.path() / "split.tsv");
  const auto r = read_split_manifest(dir.path() / "split.tsv");
  EXPECT_EQ(r.train, s.train);
  EXPECT_EQ(r.validation, s.validation);
  EXPECT_EQ(r.test, s.test);
  std::ofstream(dir.path() / "bad.tsv") << "a\ttrain\nb\tholdout\n";
  EXPECT_THROW(read_split_manifest(dir.path() / "bad.tsv"), Error);
}

}  // namespace
}  // namespace wearseg

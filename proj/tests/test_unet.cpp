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

#include <bit>
#include <filesystem>

#include "support/gradcheck.hpp"
#include "wearseg/unet.hpp"

namespace wearseg {
namespace {

UNetConfig with_phi(std::int64_t num, std::int64_t den) {
  UNetConfig c;
  c.phi = {num, den};
  return c;
}

Tensor random_images(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  return cast<float>(testing::random_tensor({n, 1, h, w}, rng, 0.0, 1.0));
}

// Independent hand count: two 3x3 convs per level, 2x2 up-convs, 1x1 head.
std::size_t hand_count(std::size_t f) {
  auto conv = [](std::size_t ci, std::size_t co, std::size_t k) { return ci * co * k * k + co; };
  const std::size_t w[5] = {f, 2 * f, 4 * f, 8 * f, 16 * f};
  std::size_t n = 0, in = 1;
  for (std::size_t l = 0; l < 5; ++l) {
    n += conv(in, w[l], 3) + conv(w[l], w[l], 3);
    in = w[l];
  }
  for (std::size_t l = 4; l > 0; --l)
    n += conv(w[l], w[l - 1], 2) + conv(2 * w[l - 1], w[l - 1], 3) + conv(w[l - 1], w[l - 1], 3);
  return n + conv(f, 6, 1);
}

TEST(ParamCount, MatchesPublishedTable) {
  EXPECT_EQ(param_count(with_phi(1, 16)), 121678u);
  EXPECT_EQ(param_count(with_phi(1, 8)), 485718u);
  EXPECT_EQ(param_count(with_phi(1, 4)), 1940902u);
  EXPECT_EQ(param_count(with_phi(1, 2)), 7759686u);
  EXPECT_EQ(param_count(with_phi(1, 1)), 31030918u);
}

TEST(ParamCount, AgreesWithHandCountAndMaterializedModel) {
  for (std::int64_t den : {16, 8, 4}) {
    const auto c = with_phi(1, den);
    EXPECT_EQ(param_count(c), hand_count(64 / static_cast<std::size_t>(den)));
    EXPECT_EQ(UNet::build(c, 1).materialized_param_count(), param_count(c));
  }
}

TEST(ParamCount, HeadLayerAtFullWidth) {
  const auto manifest = layer_manifest(with_phi(1, 1));
  std::size_t head = 0;
  for (const auto& e : manifest)
    if (e.name.rfind("head", 0) == 0) head += shape_numel(e.shape);
  EXPECT_EQ(head, 64u * 6u + 6u);
}

TEST(ParamCount, HalvingPhiRoughlyQuarters) {
  const double full = static_cast<double>(param_count(with_phi(1, 1)));
  const double half = static_cast<double>(param_count(with_phi(1, 2)));
  EXPECT_NEAR(full / half, 4.0, 0.05);
}

TEST(UNetConfig, RejectsFractionalWidthsAndBadDropout) {
  EXPECT_THROW(with_phi(1, 128).validate(), ConfigError);
  EXPECT_THROW(with_phi(3, 7).validate(), ConfigError);
  auto c = with_phi(1, 16);
  c.delta = 4.0;  // 4 * 0.3 >= 1
  EXPECT_THROW(c.validate(), ConfigError);
  c.delta = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(with_phi(1, 16).validate());
}

TEST(Rational, ParsesFractionsAndDecimals) {
  EXPECT_EQ(Rational::parse("1/16"), (Rational{1, 16}));
  EXPECT_EQ(Rational::parse("0.0625"), (Rational{1, 16}));
  EXPECT_EQ(Rational::parse("2/8"), (Rational{1, 4}));
  EXPECT_EQ(Rational::parse("1"), (Rational{1, 1}));
  EXPECT_EQ(Rational::parse("2/8").reduced().str(), "1/4");
  EXPECT_THROW(Rational::parse("abc"), ConfigError);
  EXPECT_THROW(Rational::parse("-1/2"), ConfigError);
  EXPECT_THROW(Rational::parse("1/0"), ConfigError);
}

TEST(Build, FirstLayerFiltersCenteredAtMidGray) {
  const UNet net = UNet::build(with_phi(1, 16), 11);
  const Tensor& w = net.parameters()[0];
  const Tensor& b = net.parameters()[1];
  ASSERT_EQ(w.shape(), (Shape{4, 1, 3, 3}));
  for (std::size_t c = 0; c < 4; ++c) {
    double response = b[c];
    for (std::size_t k = 0; k < 9; ++k) response += 0.5 * w[c * 9 + k];
    EXPECT_NEAR(response, 0.0, 1e-6) << "filter " << c;
  }
  for (std::size_t i = 3; i < net.parameters().size(); i += 2) {
    for (float v : net.parameters()[i].data()) ASSERT_EQ(v, 0.0f);
  }
}

TEST(Forward, ShapeAndSoftmaxSums) {
  const auto net = UNet::build(with_phi(1, 16), 3);
  const auto p = net.forward(random_images(2, 64, 64, 1), false);
  ASSERT_EQ(p.shape(), (Shape{2, 6, 64, 64}));
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < 64; i += 7)
      for (std::size_t j = 0; j < 64; j += 5) {
        double s = 0.0;
        for (std::size_t c = 0; c < 6; ++c) s += p.at(n, c, i, j);
        EXPECT_NEAR(s, 1.0, 1e-6);
      }
}

TEST(Forward, IndivisibleExtentNamesMultiple) {
  const auto net = UNet::build(with_phi(1, 16), 3);
  try {
    net.forward(random_images(1, 48, 40, 1), false);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("16"), std::string::npos) << e.what();
  }
}

TEST(Forward, DeterministicAcrossBuilds) {
  const auto x = random_images(1, 32, 32, 9);
  const auto a = UNet::build(with_phi(1, 16), 42).forward(x, false);
  const auto b = UNet::build(with_phi(1, 16), 42).forward(x, false);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  const auto c = UNet::build(with_phi(1, 16), 43).forward(x, false);
  EXPECT_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
}

TEST(Forward, ZeroDeltaMakesTrainingEqualEvaluation) {
  auto cfg = with_phi(1, 16);
  cfg.delta = 0.0;
  const auto net = UNet::build(cfg, 4);
  const auto x = random_images(2, 32, 32, 2);
  Rng rng(1);
  const auto train = net.forward(x, true, &rng);
  const auto eval = net.forward(x, false);
  EXPECT_TRUE(std::equal(train.data().begin(), train.data().end(), eval.data().begin()));
}

TEST(Forward, DropoutChangesTrainingOutput) {
  const auto net = UNet::build(with_phi(1, 16), 4);
  const auto x = random_images(1, 32, 32, 2);
  Rng rng(1);
  const auto train = net.forward(x, true, &rng);
  const auto eval = net.forward(x, false);
  EXPECT_FALSE(std::equal(train.data().begin(), train.data().end(), eval.data().begin()));
}

TEST(Predict, ArgmaxOfProbabilities) {
  const auto net = UNet::build(with_phi(1, 16), 5);
  const auto x = random_images(2, 32, 32, 3);
  const auto p = net.forward(x, false);
  const auto masks = net.predict(x);
  ASSERT_EQ(masks.size(), 2u);
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < 32; ++i)
      for (std::size_t j = 0; j < 32; ++j) {
        const auto k = masks[n].at(j, i);
        ASSERT_LT(k, 6);
        for (std::size_t c = 0; c < 6; ++c) EXPECT_GE(p.at(n, k, i, j), p.at(n, c, i, j));
      }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto net = UNet::build(with_phi(1, 8), 17);
  const TrainingMetadata meta{12, 99, {{"val_mean_iou", 0.123456789012345678}}};
  const auto path = std::filesystem::temp_directory_path() / "wearseg_test_roundtrip.ckpt";
  save_checkpoint(net, meta, path);
  const auto loaded = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(loaded.metadata, meta);
  EXPECT_EQ(loaded.model.config(), net.config());
  ASSERT_EQ(loaded.model.parameters().size(), net.parameters().size());
  for (std::size_t i = 0; i < net.parameters().size(); ++i) {
    const auto a = net.parameters()[i].data(), b = loaded.model.parameters()[i].data();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t j = 0; j < a.size(); ++j)
      ASSERT_EQ(std::bit_cast<std::uint32_t>(a[j]), std::bit_cast<std::uint32_t>(b[j]));
  }
  const auto x = random_images(1, 32, 32, 5);
  const auto before = net.forward(x, false), after = loaded.model.forward(x, false);
  EXPECT_TRUE(std::equal(before.data().begin(), before.data().end(), after.data().begin()));
}

TEST(Checkpoint, ManifestIsContiguous) {
  const auto manifest = layer_manifest(with_phi(1, 16));
  std::size_t offset = 0;
  for (const auto& e : manifest) {
    EXPECT_EQ(e.byte_offset, offset) << e.name;
    EXPECT_EQ(e.byte_size, 4 * shape_numel(e.shape)) << e.name;
    offset += e.byte_size;
  }
  EXPECT_EQ(offset, 4 * param_count(with_phi(1, 16)));
}

TEST(Checkpoint, WrongVersionIsVersionError) {
  auto bytes = serialize_checkpoint(UNet::build(with_phi(1, 16), 1), {});
  bytes[8] = static_cast<std::uint8_t>(kCheckpointVersion + 1);
  EXPECT_THROW(deserialize_checkpoint(bytes), VersionError);
}

TEST(Checkpoint, TruncationAndCorruptionAreIoErrors) {
  const auto bytes = serialize_checkpoint(UNet::build(with_phi(1, 16), 1), {});
  for (std::size_t cut : {std::size_t{4}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + static_cast<long>(cut));
    EXPECT_THROW(deserialize_checkpoint(t), IoError) << cut;
  }
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_THROW(deserialize_checkpoint(extra), IoError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad_magic), IoError);
}

TEST(Checkpoint, ManifestBlobDisagreementIsIoError) {
  auto bytes = serialize_checkpoint(UNet::build(with_phi(1, 16), 1), {});
  // Rewrite one layer size inside the text header.
  const std::string text(bytes.begin(), bytes.end());
  const auto pos = text.find("layer = head.weight");
  ASSERT_NE(pos, std::string::npos);
  const auto eol = text.find('\n', pos);
  const auto last_space = text.rfind(' ', eol);
  // Same number of characters so the header length stays valid.
  bytes[last_space + 1] = bytes[last_space + 1] == '9' ? '8' : '9';
  EXPECT_THROW(deserialize_checkpoint(bytes), IoError);
}

TEST(Checkpoint, MissingFileIsIoError) {
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/model.ckpt"), IoError);
}

}  // namespace
}  // namespace wearseg

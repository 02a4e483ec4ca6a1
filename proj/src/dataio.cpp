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

#include "wearseg/dataio.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "wearseg/rng.hpp"

namespace wearseg {

// ---------------------------------------------------------------------------
// Palette

ClassPalette::ClassPalette(std::array<PaletteEntry, kNumClasses> entries)
    : entries_(std::move(entries)) {
  std::set<Rgb> seen;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (!seen.insert(entries_[i].color).second)
      throw ConfigError("palette color of class " + std::to_string(i) + " (" + entries_[i].name +
                        ") duplicates another class");
  }
}

ClassPalette ClassPalette::standard() {
  return ClassPalette({{
      {"background", {0, 0, 0}},
      {"unworn", {0, 255, 0}},
      {"contamination", {255, 0, 0}},
      {"grooves", {0, 0, 255}},
      {"surface_spalling", {255, 255, 0}},
      {"adhesive_wear", {255, 0, 255}},
  }});
}

ClassPalette ClassPalette::parse(const std::string& text) {
  std::array<PaletteEntry, kNumClasses> entries;
  std::array<bool, kNumClasses> have{};
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    long index;
    std::string name;
    long r, g, b;
    if (!(ls >> index)) continue;  // blank line
    if (!(ls >> name >> r >> g >> b))
      throw ConfigError("palette line " + std::to_string(lineno) + ": expected 'index name R G B'");
    if (index < 0 || index >= static_cast<long>(kNumClasses))
      throw ConfigError("palette line " + std::to_string(lineno) + ": class index out of range");
    for (long c : {r, g, b})
      if (c < 0 || c > 255)
        throw ConfigError("palette line " + std::to_string(lineno) + ": color component out of range");
    if (have[index]) throw ConfigError("palette line " + std::to_string(lineno) + ": duplicate index");
    have[index] = true;
    entries[index] = {name, {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                             static_cast<std::uint8_t>(b)}};
  }
  for (std::size_t i = 0; i < kNumClasses; ++i)
    if (!have[i]) throw ConfigError("palette is missing class " + std::to_string(i));
  return ClassPalette(entries);
}

ClassPalette ClassPalette::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open palette file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string ClassPalette::to_text() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < kNumClasses; ++i)
    os << i << ' ' << entries_[i].name << ' ' << int(entries_[i].color[0]) << ' '
       << int(entries_[i].color[1]) << ' ' << int(entries_[i].color[2]) << '\n';
  return os.str();
}

std::optional<std::uint8_t> ClassPalette::lookup(const Rgb& color) const {
  for (std::size_t i = 0; i < kNumClasses; ++i)
    if (entries_[i].color == color) return static_cast<std::uint8_t>(i);
  return std::nullopt;
}

LabelMask decode_mask(const RgbImage& rgb, const ClassPalette& palette) {
  LabelMask mask(rgb.width, rgb.height);
  for (std::size_t i = 0; i < rgb.width * rgb.height; ++i) {
    const Rgb c{rgb.pixels[3 * i], rgb.pixels[3 * i + 1], rgb.pixels[3 * i + 2]};
    const auto cls = palette.lookup(c);
    if (!cls) {
      std::ostringstream os;
      os << "mask pixel (" << i % rgb.width << "," << i / rgb.width << ") has color (" << int(c[0])
         << "," << int(c[1]) << "," << int(c[2]) << ") which is not in the palette";
      throw DataError(os.str());
    }
    mask.classes[i] = *cls;
  }
  return mask;
}

RgbImage encode_mask(const LabelMask& mask, const ClassPalette& palette) {
  mask.validate();
  RgbImage rgb(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.classes.size(); ++i) {
    const auto& c = palette.entry(mask.classes[i]).color;
    std::copy(c.begin(), c.end(), rgb.pixels.begin() + 3 * i);
  }
  return rgb;
}

// ---------------------------------------------------------------------------
// PNG / PGM

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

struct PngData {
  std::size_t width = 0, height = 0;
  int color_type = 0, bit_depth = 0;
  std::vector<std::uint8_t> pixels;
};

// Reads an 8-bit PNG whose color type is in `allowed` without conversions.
PngData read_png_raw(const std::filesystem::path& path, std::initializer_list<int> allowed,
                     const char* expect) {
  auto f = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw DataError(path.string() + " is not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  PngData out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("corrupt PNG file " + path.string());
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.color_type = png_get_color_type(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const bool ok_type = std::find(allowed.begin(), allowed.end(), out.color_type) != allowed.end();
  if (out.bit_depth != 8 || !ok_type) {
    const std::string problem = path.string() + ": unsupported PNG (bit depth " +
                                std::to_string(out.bit_depth) + ", color type " +
                                std::to_string(out.color_type) + "); expected 8-bit " + expect;
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(problem);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.pixels.resize(stride * out.height);
  rows.resize(out.height);
  for (std::size_t y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png(const std::filesystem::path& path, std::size_t width, std::size_t height,
               png_uint_32 format, const std::uint8_t* data) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  if (!png_image_write_to_file(&img, path.c_str(), 0, data, 0, nullptr))
    throw IoError("failed to write " + path.string() + ": " + img.message);
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::string magic;
  f >> magic;
  if (magic != "P5") throw DataError(path.string() + ": only binary PGM (P5) is supported");
  auto next_int = [&]() {
    long v = -1;
    while (f >> std::ws && f.peek() == '#') f.ignore(1 << 20, '\n');
    f >> v;
    return v;
  };
  const long w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0) throw DataError(path.string() + ": bad PGM header");
  if (maxval != 255)
    throw DataError(path.string() + ": unsupported PGM maxval " + std::to_string(maxval) +
                    "; expected 8-bit (255)");
  f.get();
  GrayImage img(static_cast<std::size_t>(w), static_cast<std::size_t>(h));
  f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!f) throw DataError(path.string() + ": truncated PGM data");
  return img;
}

}  // namespace

GrayImage read_gray_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return read_pgm(path);
  auto raw = read_png_raw(path, {PNG_COLOR_TYPE_GRAY}, "grayscale");
  GrayImage img;
  img.width = raw.width;
  img.height = raw.height;
  img.pixels = std::move(raw.pixels);
  return img;
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  auto raw = read_png_raw(path, {PNG_COLOR_TYPE_RGB}, "RGB");
  RgbImage img;
  img.width = raw.width;
  img.height = raw.height;
  img.pixels = std::move(raw.pixels);
  return img;
}

void write_gray_png(const GrayImage& image, const std::filesystem::path& path) {
  write_png(path, image.width, image.height, PNG_FORMAT_GRAY, image.pixels.data());
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  write_png(path, image.width, image.height, PNG_FORMAT_RGB, image.pixels.data());
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Extent adjustment

namespace {

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

// Maps adjusted coordinate to a clamped original coordinate.
std::size_t source_coord(std::size_t a, std::size_t offset, std::size_t source, std::size_t extent) {
  const long v = static_cast<long>(a) - static_cast<long>(offset) + static_cast<long>(source);
  return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(extent) - 1));
}

template <typename Raster, typename Pixels>
void resample(const Raster& src, const CropInfo& crop, std::size_t w, std::size_t h, Pixels& dst) {
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t sy = source_coord(y, crop.offset_y, crop.source_y, src.height);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t sx = source_coord(x, crop.offset_x, crop.source_x, src.width);
      dst[y * w + x] = src.at(sx, sy);
    }
  }
}

}  // namespace

AdjustedImage adjust_extents(const GrayImage& image, ExtentPolicy policy, std::size_t multiple) {
  if (multiple == 0) throw ConfigError("extent multiple must be positive");
  CropInfo crop{image.width, image.height, 0, 0, 0, 0};
  if (policy == ExtentPolicy::kKeep) return {image, crop};
  std::size_t w = image.width, h = image.height;
  if (policy == ExtentPolicy::kPadToMultiple) {
    w = round_up(image.width, multiple);
    h = round_up(image.height, multiple);
    crop.offset_x = (w - image.width) / 2;
    crop.offset_y = (h - image.height) / 2;
  } else {
    w = image.width / multiple * multiple;
    h = image.height / multiple * multiple;
    if (w == 0 || h == 0)
      throw ConfigError("image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                        " is smaller than the extent multiple " + std::to_string(multiple));
    crop.source_x = (image.width - w) / 2;
    crop.source_y = (image.height - h) / 2;
  }
  GrayImage out(w, h);
  resample(image, crop, w, h, out.pixels);
  return {std::move(out), crop};
}

LabelMask adjust_mask(const LabelMask& mask, const CropInfo& crop, std::size_t width,
                      std::size_t height) {
  LabelMask out(width, height);
  resample(mask, crop, width, height, out.classes);
  return out;
}

LabelMask restore_mask(const LabelMask& mask, const CropInfo& crop, std::uint8_t fill) {
  LabelMask out(crop.original_width, crop.original_height, fill);
  for (std::size_t y = 0; y < mask.height; ++y) {
    const long oy = static_cast<long>(y) - static_cast<long>(crop.offset_y) + static_cast<long>(crop.source_y);
    if (oy < 0 || oy >= static_cast<long>(out.height)) continue;
    for (std::size_t x = 0; x < mask.width; ++x) {
      const long ox = static_cast<long>(x) - static_cast<long>(crop.offset_x) + static_cast<long>(crop.source_x);
      if (ox < 0 || ox >= static_cast<long>(out.width)) continue;
      out.at(static_cast<std::size_t>(ox), static_cast<std::size_t>(oy)) = mask.at(x, y);
    }
  }
  return out;
}

Tensor images_to_tensor(std::span<const GrayImage* const> images) {
  if (images.empty()) throw ConfigError("cannot build a tensor from zero images");
  const std::size_t w = images[0]->width, h = images[0]->height;
  std::vector<float> data;
  data.reserve(images.size() * w * h);
  for (const GrayImage* img : images) {
    if (img->width != w || img->height != h)
      throw DataError("images in a batch must share extents");
    for (auto v : img->pixels) data.push_back(static_cast<float>(v) / 255.0f);
  }
  return Tensor({images.size(), 1, h, w}, std::move(data));
}

Tensor image_to_tensor(const GrayImage& image) {
  const GrayImage* one[] = {&image};
  return images_to_tensor(one);
}

LoadedImage load_image(const std::filesystem::path& path, ExtentPolicy policy, std::size_t multiple) {
  auto adjusted = adjust_extents(read_gray_image(path), policy, multiple);
  return {image_to_tensor(adjusted.image), adjusted.crop};
}

// ---------------------------------------------------------------------------
// Splits

const char* subset_name(Subset s) {
  switch (s) {
    case Subset::kTrain: return "train";
    case Subset::kValidation: return "validation";
    case Subset::kTest: return "test";
  }
  return "?";
}

Subset parse_subset(const std::string& name) {
  if (name == "train") return Subset::kTrain;
  if (name == "validation" || name == "val") return Subset::kValidation;
  if (name == "test") return Subset::kTest;
  throw ConfigError("unknown subset '" + name + "' (expected train, validation or test)");
}

SplitStrategy parse_split_strategy(const std::string& name) {
  if (name == "equidistant") return SplitStrategy::kEquidistant;
  if (name == "random") return SplitStrategy::kRandom;
  throw ConfigError("unknown split strategy '" + name + "' (expected equidistant or random)");
}

const std::vector<std::string>& DatasetSplit::subset(Subset s) const {
  switch (s) {
    case Subset::kTrain: return train;
    case Subset::kValidation: return validation;
    case Subset::kTest: return test;
  }
  return train;
}

DatasetSplit split_dataset(std::span<const std::string> ids, std::array<double, 3> fractions,
                           std::uint64_t seed, SplitStrategy strategy) {
  if (ids.size() < 5) throw ConfigError("need at least 5 ids to split, got " + std::to_string(ids.size()));
  for (double f : fractions)
    if (!(f >= 0.0)) throw ConfigError("split fractions must be non-negative");
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
  {
    std::set<std::string> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size()) throw DataError("split ids must be unique");
  }
  const std::size_t n = ids.size();
  const auto held = [n](double f) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
  };
  const std::size_t n_val = held(fractions[1]);
  const std::size_t n_test = held(fractions[2]);
  const std::size_t n_held = n_val + n_test;

  DatasetSplit out;
  out.fractions = fractions;
  out.seed = seed;
  Rng rng(derive_seed({seed, 0x73706c6974ULL}));

  std::vector<std::size_t> held_positions;
  std::vector<bool> is_held(n, false);
  if (strategy == SplitStrategy::kEquidistant) {
    // Evenly spaced positions, centered within each stride.
    for (std::size_t i = 0; i < n_held; ++i) {
      const std::size_t pos = static_cast<std::size_t>(
          (static_cast<double>(i) + 0.5) * static_cast<double>(n) / static_cast<double>(n_held));
      held_positions.push_back(std::min(pos, n - 1));
      is_held[held_positions.back()] = true;
    }
    rng.shuffle(held_positions);
  } else {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    held_positions.assign(order.begin(), order.begin() + static_cast<long>(n_held));
    for (auto p : held_positions) is_held[p] = true;
  }
  for (std::size_t i = 0; i < n_held; ++i) {
    auto& dst = i < n_val ? out.validation : out.test;
    dst.push_back(ids[held_positions[i]]);
  }
  // Keep the held-out subsets in stroke order.
  auto by_position = [&](std::vector<std::string>& v) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i) pos[ids[i]] = i;
    std::sort(v.begin(), v.end(), [&](const auto& a, const auto& b) { return pos[a] < pos[b]; });
  };
  by_position(out.validation);
  by_position(out.test);
  for (std::size_t i = 0; i < n; ++i)
    if (!is_held[i]) out.train.push_back(ids[i]);
  if (strategy == SplitStrategy::kRandom) rng.shuffle(out.train);
  return out;
}

void write_split_manifest(const DatasetSplit& split, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  for (Subset s : {Subset::kTrain, Subset::kValidation, Subset::kTest})
    for (const auto& id : split.subset(s)) f << id << '\t' << subset_name(s) << '\n';
  if (!f) throw IoError("failed writing " + path.string());
}

DatasetSplit read_split_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open split manifest " + path.string());
  DatasetSplit out;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 'id<TAB>subset'");
    const std::string id = line.substr(0, tab);
    if (!seen.insert(id).second)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate id " + id);
    switch (parse_subset(line.substr(tab + 1))) {
      case Subset::kTrain: out.train.push_back(id); break;
      case Subset::kValidation: out.validation.push_back(id); break;
      case Subset::kTest: out.test.push_back(id); break;
    }
  }
  const double n = static_cast<double>(out.size());
  if (n > 0)
    out.fractions = {out.train.size() / n, out.validation.size() / n, out.test.size() / n};
  return out;
}

}  // namespace wearseg

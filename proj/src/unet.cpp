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

#include "wearseg/unet.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "wearseg/ops.hpp"

namespace wearseg {


Rational Rational::reduced() const {
  const std::int64_t g = std::gcd(num, den);
  return g == 0 ? *this : Rational{num / g, den / g};
}

std::string Rational::str() const {
  const Rational r = reduced();
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

Rational Rational::parse(const std::string& text) {
  auto fail = [&] { return ConfigError("cannot parse '" + text + "' as a positive fraction"); };
  try {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
      std::size_t used = 0;
      const long long n = std::stoll(text.substr(0, slash), &used);
      if (used != slash) throw fail();
      const std::string rest = text.substr(slash + 1);
      const long long d = std::stoll(rest, &used);
      if (used != rest.size()) throw fail();
      if (n <= 0 || d <= 0) throw fail();
      return Rational{n, d}.reduced();
    }
    const auto dot = text.find('.');
    std::size_t used = 0;
    if (dot == std::string::npos) {
      const long long n = std::stoll(text, &used);
      if (used != text.size() || n <= 0) throw fail();
      return {n, 1};
    }
    const std::string whole = text.substr(0, dot);
    const std::string frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 12 || frac.find_first_not_of("0123456789") != std::string::npos)
      throw fail();
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::int64_t w = whole.empty() ? 0 : std::stoll(whole, &used);
    if (!whole.empty() && used != whole.size()) throw fail();
    const Rational r = Rational{w * den + std::stoll(frac), den}.reduced();
    if (r.num <= 0) throw fail();
    return r;
  } catch (const std::invalid_argument&) {
    throw fail();
  } catch (const std::out_of_range&) {
    throw fail();
  }
}

void UNetConfig::validate() const {
  if (phi.num <= 0 || phi.den <= 0) throw ConfigError("phi must be positive, got " + phi.str());
  if (in_channels == 0 || num_classes < 2) throw ConfigError("need >= 1 input channel and >= 2 classes");
  if (depth == 0 || depth > 8) throw ConfigError("depth must be in 1..8");
  if (base_dropout.size() != depth + 1)
    throw ConfigError("base_dropout needs " + std::to_string(depth + 1) + " entries, got " +
                      std::to_string(base_dropout.size()));
  if (!(delta >= 0.0)) throw ConfigError("dropout factor delta must be >= 0");
  for (std::size_t level = 0; level <= depth; ++level) {
    const std::int64_t filters = static_cast<std::int64_t>(base_filters << level);
    if ((filters * phi.num) % phi.den != 0 || filters * phi.num / phi.den <= 0)
      throw ConfigError("phi = " + phi.str() + " gives a non-integer channel width at level " +
                        std::to_string(level) + " (" + std::to_string(filters) + " * " +
                        phi.str() + ")");
    const double rate = dropout_rate(level);
    if (!(rate >= 0.0) || rate >= 1.0)
      throw ConfigError("effective dropout rate " + std::to_string(rate) + " at level " +
                        std::to_string(level) + " is outside [0, 1)");
  }
}

std::vector<std::size_t> UNetConfig::widths() const {
  validate();
  std::vector<std::size_t> w;
  for (std::size_t level = 0; level <= depth; ++level)
    w.push_back(static_cast<std::size_t>(static_cast<std::int64_t>(base_filters << level) *
                                         phi.num / phi.den));
  return w;
}

std::vector<LayerEntry> layer_manifest(const UNetConfig& config) {
  const auto w = config.widths();
  std::vector<LayerEntry> out;
  auto add = [&](std::string name, Shape shape) {
    out.push_back({std::move(name), std::move(shape), 0, 0});
  };
  auto conv = [&](const std::string& prefix, std::size_t in, std::size_t outc, std::size_t k) {
    add(prefix + ".weight", {outc, in, k, k});
    add(prefix + ".bias", {outc});
  };
  std::size_t in = config.in_channels;
  for (std::size_t level = 0; level < config.depth; ++level) {
    const std::string p = "enc" + std::to_string(level + 1);
    conv(p + ".conv1", in, w[level], 3);
    conv(p + ".conv2", w[level], w[level], 3);
    in = w[level];
  }
  conv("bottleneck.conv1", in, w[config.depth], 3);
  conv("bottleneck.conv2", w[config.depth], w[config.depth], 3);
  in = w[config.depth];
  for (std::size_t level = config.depth; level-- > 0;) {
    const std::string p = "dec" + std::to_string(level + 1);
    add(p + ".up.weight", {in, w[level], 2, 2});
    add(p + ".up.bias", {w[level]});
    conv(p + ".conv1", 2 * w[level], w[level], 3);
    conv(p + ".conv2", w[level], w[level], 3);
    in = w[level];
  }
  conv("head", in, config.num_classes, 1);

  std::size_t offset = 0;
  for (auto& e : out) {
    e.byte_offset = offset;
    e.byte_size = shape_numel(e.shape) * sizeof(float);
    offset += e.byte_size;
  }
  return out;
}

std::size_t param_count(const UNetConfig& config) {
  const auto w = config.widths();
  const auto conv = [](std::size_t in, std::size_t out, std::size_t k) { return out * (in * k * k + 1); };
  std::size_t total = 0;
  std::size_t in = config.in_channels;
  for (std::size_t level = 0; level <= config.depth; ++level) {
    total += conv(in, w[level], 3) + conv(w[level], w[level], 3);
    in = w[level];
  }
  for (std::size_t level = config.depth; level-- > 0;) {
    total += w[level] * (in * 4 + 1);  // 2x2 transposed conv
    total += conv(2 * w[level], w[level], 3) + conv(w[level], w[level], 3);
    in = w[level];
  }
  return total + conv(in, config.num_classes, 1);
}

UNet UNet::build(const UNetConfig& config, std::uint64_t seed) {
  auto manifest = layer_manifest(config);
  Rng rng(derive_seed({seed, 0x756e6574ULL}));
  std::vector<Tensor> params;
  params.reserve(manifest.size());
  for (const auto& e : manifest) {
    Tensor t(e.shape);
    if (e.shape.size() == 4) {
      // Transposed-conv weights are (Ci, Co, 2, 2); each output sees Ci inputs.
      const bool up = e.name.find(".up.") != std::string::npos;
      const std::size_t fan_in = up ? e.shape[0] : e.shape[1] * e.shape[2] * e.shape[3];
      const double sigma = std::sqrt(2.0 / static_cast<double>(fan_in));
      rng.fill_normal(t.mutable_data(), 0.0, sigma);
    }
    t.set_requires_grad(true);
    params.push_back(std::move(t));
  }
  // Inputs lie in [0, 1], so zero biases would leave every first-layer filter
  // whose weights sum negative dead on flat regions. Centering each filter at
  // mid-gray keeps the narrow full-resolution path alive.
  const Tensor& w0 = params[0];
  Tensor& b0 = params[1];
  const std::size_t taps = w0.numel() / b0.numel();
  for (std::size_t c = 0; c < b0.numel(); ++c) {
    double sum = 0.0;
    for (std::size_t k = 0; k < taps; ++k) sum += w0[c * taps + k];
    b0[c] = static_cast<float>(-0.5 * sum);
  }
  return UNet(config, std::move(manifest), std::move(params));
}

UNet UNet::from_parameters(const UNetConfig& config, std::vector<Tensor> params) {
  auto manifest = layer_manifest(config);
  if (params.size() != manifest.size())
    throw ConfigError("expected " + std::to_string(manifest.size()) + " parameter tensors, got " +
                      std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != manifest[i].shape)
      throw ConfigError("parameter " + manifest[i].name + " has shape " +
                        shape_str(params[i].shape()) + ", expected " +
                        shape_str(manifest[i].shape));
    params[i].set_requires_grad(true);
  }
  return UNet(config, std::move(manifest), std::move(params));
}

std::size_t UNet::materialized_param_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.numel();
  return n;
}

Tensor UNet::logits(const Tensor& images, bool training, Rng* rng) const {
  if (images.rank() != 4) throw ConfigError("images must be N x C x H x W, got " + shape_str(images.shape()));
  if (images.dim(1) != config_.in_channels)
    throw ConfigError("model expects " + std::to_string(config_.in_channels) +
                      " input channel(s), got " + std::to_string(images.dim(1)));
  const std::size_t m = config_.spatial_multiple();
  if (images.dim(2) % m != 0 || images.dim(3) % m != 0)
    throw ConfigError("image extents " + std::to_string(images.dim(3)) + "x" +
                      std::to_string(images.dim(2)) + " must be multiples of " + std::to_string(m));
  const bool use_dropout = training && config_.delta > 0.0;
  if (use_dropout && rng == nullptr) throw ConfigError("training-mode forward needs an rng");

  const auto w = config_.widths();
  std::size_t idx = 0;
  auto conv = [&](const Tensor& x, std::size_t in, std::size_t out, bool pointwise) {
    const auto spec = pointwise ? ops::ConvSpec::pointwise(in, out) : ops::ConvSpec::same3x3(in, out);
    const Tensor& weight = params_[idx++];
    const Tensor& bias = params_[idx++];
    return ops::conv2d(x, spec, weight, bias);
  };
  auto drop = [&](const Tensor& x, std::size_t level) {
    return use_dropout ? ops::dropout(x, config_.dropout_rate(level), *rng, true) : x;
  };

  Tensor x = images;
  std::size_t in = config_.in_channels;
  std::vector<Tensor> skips;
  for (std::size_t level = 0; level < config_.depth; ++level) {
    x = ops::relu(conv(x, in, w[level], false));
    x = ops::relu(conv(x, w[level], w[level], false));
    x = drop(x, level);
    skips.push_back(x);
    x = ops::maxpool2d(x).output;
    in = w[level];
  }
  x = ops::relu(conv(x, in, w[config_.depth], false));
  x = ops::relu(conv(x, w[config_.depth], w[config_.depth], false));
  x = drop(x, config_.depth);
  for (std::size_t level = config_.depth; level-- > 0;) {
    const Tensor& up_w = params_[idx++];
    const Tensor& up_b = params_[idx++];
    x = ops::transposed_conv2d(x, up_w, up_b);
    x = ops::concat_channels(skips[level], x);
    x = ops::relu(conv(x, 2 * w[level], w[level], false));
    x = ops::relu(conv(x, w[level], w[level], false));
    x = drop(x, level);
  }
  return conv(x, w[0], config_.num_classes, true);
}

Tensor UNet::forward(const Tensor& images, bool training, Rng* rng) const {
  return ops::softmax_channels(logits(images, training, rng));
}

std::vector<LabelMask> argmax_masks(const Tensor& scores) {
  if (scores.rank() != 4) throw ConfigError("argmax_masks expects N x K x H x W");
  const std::size_t n = scores.dim(0), k = scores.dim(1), h = scores.dim(2), w = scores.dim(3);
  std::vector<LabelMask> out;
  for (std::size_t item = 0; item < n; ++item) {
    LabelMask m(w, h);
    for (std::size_t px = 0; px < h * w; ++px) {
      std::size_t best = 0;
      float bv = scores[(item * k) * h * w + px];
      for (std::size_t c = 1; c < k; ++c) {
        const float v = scores[(item * k + c) * h * w + px];
        if (v > bv) {
          bv = v;
          best = c;
        }
      }
      m.classes[px] = static_cast<std::uint8_t>(best);
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<LabelMask> UNet::predict(const Tensor& images) const {
  // Softmax is monotone per pixel, so argmax over logits is the same mask.
  return argmax_masks(logits(images, false));
}

void UNet::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

UNet UNet::clone() const {
  std::vector<Tensor> copy;
  copy.reserve(params_.size());
  for (const auto& p : params_) copy.push_back(p.detach().set_requires_grad(true));
  return UNet(config_, manifest_, std::move(copy));
}

// ---------------------------------------------------------------------------
// Checkpoint serialization

namespace {

constexpr char kMagic[8] = {'W', 'S', 'E', 'G', 'C', 'K', 'P', 'T'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n)
      throw IoError(std::string("checkpoint truncated while reading ") + what);
  }
  std::uint64_t uint(int width, const char* what) {
    need(width, what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }
  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string shape_token(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const UNet& model, const TrainingMetadata& meta) {
  const auto& c = model.config();
  std::ostringstream h;
  h << "config.phi = " << c.phi.str() << '\n'
    << "config.delta = " << fmt_double(c.delta) << '\n'
    << "config.in_channels = " << c.in_channels << '\n'
    << "config.num_classes = " << c.num_classes << '\n'
    << "config.base_filters = " << c.base_filters << '\n'
    << "config.depth = " << c.depth << '\n'
    << "config.base_dropout =";
  for (double d : c.base_dropout) h << ' ' << fmt_double(d);
  h << '\n'
    << "meta.epoch = " << meta.epoch << '\n'
    << "meta.seed = " << meta.seed << '\n';
  for (const auto& [k, v] : meta.metrics) h << "meta.metric." << k << " = " << fmt_double(v) << '\n';
  for (const auto& e : model.manifest())
    h << "layer = " << e.name << ' ' << shape_token(e.shape) << ' ' << e.byte_offset << ' '
      << e.byte_size << '\n';
  const std::string header = h.str();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u64(out, header.size());
  out.insert(out.end(), header.begin(), header.end());
  const std::size_t blob = model.materialized_param_count() * sizeof(float);
  put_u64(out, blob);
  out.reserve(out.size() + blob);
  for (const auto& p : model.parameters())
    for (float v : p.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

LoadedCheckpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.text(8, "magic") != std::string(kMagic, 8)) throw IoError("not a wearseg checkpoint (bad magic)");
  const auto version = static_cast<std::uint32_t>(r.uint(4, "format version"));
  if (version != kCheckpointVersion)
    throw VersionError("checkpoint format_version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  const auto header_len = r.uint(8, "header length");
  const std::string header = r.text(header_len, "header");

  UNetConfig config;
  TrainingMetadata meta;
  std::vector<LayerEntry> layers;
  std::istringstream lines(header);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("malformed checkpoint header line: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::istringstream vs(value);
    if (key == "config.phi") config.phi = Rational::parse(value);
    else if (key == "config.delta") config.delta = std::stod(value);
    else if (key == "config.in_channels") config.in_channels = std::stoul(value);
    else if (key == "config.num_classes") config.num_classes = std::stoul(value);
    else if (key == "config.base_filters") config.base_filters = std::stoul(value);
    else if (key == "config.depth") config.depth = std::stoul(value);
    else if (key == "config.base_dropout") {
      config.base_dropout.clear();
      std::string tok;
      while (vs >> tok) config.base_dropout.push_back(std::stod(tok));
    } else if (key == "meta.epoch") meta.epoch = std::stoll(value);
    else if (key == "meta.seed") meta.seed = std::stoull(value);
    else if (key.rfind("meta.metric.", 0) == 0) meta.metrics[key.substr(12)] = std::stod(value);
    else if (key == "layer") {
      LayerEntry e;
      std::string shape_tok;
      if (!(vs >> e.name >> shape_tok >> e.byte_offset >> e.byte_size))
        throw IoError("malformed layer manifest line: " + line);
      std::istringstream ss(shape_tok);
      std::string d;
      while (std::getline(ss, d, 'x')) e.shape.push_back(std::stoul(d));
      layers.push_back(std::move(e));
    } else {
      throw IoError("unknown checkpoint header key '" + key + "'");
    }
  }

  const auto blob_len = r.uint(8, "blob length");
  std::size_t expected = 0;
  for (const auto& e : layers) {
    if (e.byte_offset != expected)
      throw IoError("layer manifest entry " + e.name + " is not contiguous (offset " +
                    std::to_string(e.byte_offset) + ", expected " + std::to_string(expected) + ")");
    if (e.byte_size != shape_numel(e.shape) * sizeof(float))
      throw IoError("layer manifest entry " + e.name + " size disagrees with its shape");
    expected += e.byte_size;
  }
  if (expected != blob_len)
    throw IoError("layer manifest covers " + std::to_string(expected) + " bytes but blob length is " +
                  std::to_string(blob_len));
  if (r.remaining() < blob_len)
    throw IoError("checkpoint truncated: blob needs " + std::to_string(blob_len) + " bytes, " +
                  std::to_string(r.remaining()) + " present");
  if (r.remaining() > blob_len) throw IoError("checkpoint has trailing bytes after the blob");

  const auto reference = layer_manifest(config);
  if (reference.size() != layers.size())
    throw IoError("checkpoint manifest does not match its config");
  std::vector<Tensor> params;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name != reference[i].name || layers[i].shape != reference[i].shape)
      throw IoError("checkpoint layer " + layers[i].name + " does not match config layer " +
                    reference[i].name);
    std::vector<float> values(shape_numel(layers[i].shape));
    for (auto& v : values) v = std::bit_cast<float>(static_cast<std::uint32_t>(r.uint(4, "blob")));
    params.emplace_back(layers[i].shape, std::move(values));
  }
  return {UNet::from_parameters(config, std::move(params)), std::move(meta)};
}

void save_checkpoint(const UNet& model, const TrainingMetadata& meta,
                     const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(model, meta);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace wearseg

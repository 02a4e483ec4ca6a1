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

#include "wearseg/run_config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

namespace wearseg {
namespace {

// Registration order is the order of canonical_text().
const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> d = {
      {"run.seed", "0"},
      {"run.threads", "0"},
      {"run.out_dir", "out"},

      {"net.phi", "1/16"},
      {"net.delta", "0.48"},
      {"net.base_filters", "64"},
      {"net.depth", "4"},
      {"net.base_dropout", "0.1,0.1,0.2,0.2,0.3"},

      {"train.learning_rate", "5.4e-4"},
      {"train.batch_size", "4"},
      {"train.epochs", "60"},
      {"train.class_weights", "1,1,1,1,1,1"},
      {"train.optimizer", "adam"},
      {"train.validate_every", "1"},
      {"train.checkpoint_every", "0"},
      {"train.augment", "true"},

      {"augment.flip_probability", "0.5"},
      {"augment.gamma_range", "0.8,1.2"},
      {"augment.contrast_range", "0.8,1.2"},
      {"augment.brightness_range", "0.8,1.2"},
      {"augment.noise_range", "-50,50"},
      {"augment.noise_sigma", "16.666666666666668"},
      {"augment.copies", "2"},

      {"synth.count", "64"},
      {"synth.width", "64"},
      {"synth.height", "64"},
      {"synth.band_fractions", "0.12,0.22,0.32,0.20,0.14"},
      {"synth.band_jitter", "3"},
      {"synth.max_dot_density", "0.01"},
      {"synth.dot_radius", "1.5,3.5"},
      {"synth.adhesive_gray", "45"},
      {"synth.groove_count", "7"},
      {"synth.groove_amplitude", "1.5"},
      {"synth.groove_darkness", "70"},
      {"synth.contamination_blobs", "4"},
      {"synth.gray_levels", "25,190,140,165,100"},
      {"synth.noise_sigma", "6"},
      {"synth.sequence_frames", "0"},
      {"synth.first_stroke", "0"},
      {"synth.stroke_step", "500"},
      {"synth.wear_tau", "15000"},
      {"synth.cleaning_strokes", ""},

      {"data.dir", ""},
      {"data.palette", ""},
      {"data.split", "0.6,0.2,0.2"},
      {"data.split_strategy", "equidistant"},
      {"data.extent_policy", "keep"},

      {"model.checkpoint", ""},
      {"eval.subset", "test"},
      {"series.sequence_dir", ""},
      {"series.class", "5"},
      {"series.window", "0"},

      {"grid.phis", "1/16,1/8,1/4,1/2"},
      {"grid.batch_sizes", "1,2,4,8,16"},
      {"grid.epochs", "60"},

      {"bayes.lower", "1,1"},
      {"bayes.upper", "10,10"},
      {"bayes.initial_samples", "5"},
      {"bayes.iterations", "20"},
      {"bayes.lattice", "64"},
      {"bayes.noise_floor", "1e-6"},
      {"bayes.exploration", "0.01"},
      {"bayes.epochs", "60"},

      {"timing.stroke_length_mm", "35"},
      {"timing.strokes_per_minute", "600"},
      {"timing.exposure_us", "50"},
      {"timing.targets_um", "1,5,10,20"},
      {"timing.field_of_view_mm", "12"},
      {"timing.image_width_px", "1920"},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

ConfigError bad_value(const std::string& key, const std::string& value, const char* expected) {
  return ConfigError(key + ": expected " + expected + ", got '" + value + "'");
}

double parse_real(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw bad_value(key, text, "a finite number");
  }
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (text.empty() || end != begin + text.size() || errno == ERANGE) {
    throw bad_value(key, text, "an integer");
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const std::int64_t v = parse_int(key, text);
  if (v < 0) throw bad_value(key, text, "a non-negative integer");
  return static_cast<std::size_t>(v);
}

template <std::size_t N>
std::array<double, N> fixed_reals(const RunConfig& c, const std::string& key) {
  const auto v = c.reals(key);
  if (v.size() != N) {
    throw ConfigError(key + ": expected " + std::to_string(N) + " comma-separated values, got " +
                      std::to_string(v.size()));
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = v[i];
  return out;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig::RunConfig() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [key, value] : defaults()) out.push_back(key);
    return out;
  }();
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value, const std::string& source) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(source + ": unknown key '" + key + "'");
  it->second = value;
}

void RunConfig::load_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.find('.') == std::string::npos) {
      throw ConfigError(where + ": key '" + key + "' must have the form section.key");
    }
    set(key, trim(line.substr(eq + 1)), where);
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path.string());
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("--set '" + assignment + "': expected section.key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "--set");
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const { return parse_real(key, get(key)); }
std::int64_t RunConfig::integer(const std::string& key) const { return parse_int(key, get(key)); }
std::size_t RunConfig::count(const std::string& key) const { return parse_count(key, get(key)); }

std::uint64_t RunConfig::u64(const std::string& key) const {
  const std::string& text = get(key);
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw bad_value(key, text, "a non-negative integer");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), nullptr, 10);
  if (errno == ERANGE) throw bad_value(key, text, "a 64-bit integer");
  return v;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw bad_value(key, v, "true or false");
}

Rational RunConfig::rational(const std::string& key) const {
  try {
    return Rational::parse(get(key));
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::vector<double> RunConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split_list(get(key))) out.push_back(parse_real(key, s));
  return out;
}

std::vector<std::size_t> RunConfig::counts(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(get(key))) out.push_back(parse_count(key, s));
  return out;
}

std::vector<Rational> RunConfig::rationals(const std::string& key) const {
  std::vector<Rational> out;
  for (const auto& s : split_list(get(key))) {
    try {
      out.push_back(Rational::parse(s));
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  return out;
}

std::optional<std::filesystem::path> RunConfig::path(const std::string& key) const {
  const std::string& v = get(key);
  if (v.empty()) return std::nullopt;
  return std::filesystem::path(v);
}

std::string RunConfig::canonical_text() const {
  std::string out;
  for (const auto& key : keys()) out += key + " = " + values_.at(key) + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_text()); }

UNetConfig RunConfig::net() const {
  UNetConfig c;
  c.phi = rational("net.phi");
  c.delta = real("net.delta");
  c.base_filters = count("net.base_filters");
  c.depth = count("net.depth");
  c.base_dropout = reals("net.base_dropout");
  c.validate();
  return c;
}

TrainConfig RunConfig::train() const {
  TrainConfig c;
  c.learning_rate = real("train.learning_rate");
  c.batch_size = count("train.batch_size");
  c.epochs = count("train.epochs");
  c.class_weights = fixed_reals<kNumClasses>(*this, "train.class_weights");
  c.seed = u64("run.seed");
  c.optimizer = str("train.optimizer");
  c.validate_every = count("train.validate_every");
  c.checkpoint_every = count("train.checkpoint_every");
  c.validate();
  return c;
}

AugmentSpec RunConfig::augment() const {
  AugmentSpec a;
  a.flip_probability = real("augment.flip_probability");
  a.gamma_range = fixed_reals<2>(*this, "augment.gamma_range");
  a.contrast_range = fixed_reals<2>(*this, "augment.contrast_range");
  a.brightness_range = fixed_reals<2>(*this, "augment.brightness_range");
  a.noise_range = fixed_reals<2>(*this, "augment.noise_range");
  a.noise_sigma = real("augment.noise_sigma");
  a.copies_per_image = count("augment.copies");
  a.seed = u64("run.seed");
  a.validate();
  return a;
}

synth::SyntheticSpec RunConfig::synthetic() const {
  synth::SyntheticSpec s;
  s.width = count("synth.width");
  s.height = count("synth.height");
  s.band_fractions = fixed_reals<synth::kBandCount>(*this, "synth.band_fractions");
  s.band_jitter = count("synth.band_jitter");
  s.max_dot_density = real("synth.max_dot_density");
  const auto radius = fixed_reals<2>(*this, "synth.dot_radius");
  s.dot_radius_min = radius[0];
  s.dot_radius_max = radius[1];
  s.adhesive_gray = real("synth.adhesive_gray");
  s.groove_count = count("synth.groove_count");
  s.groove_amplitude = real("synth.groove_amplitude");
  s.groove_darkness = real("synth.groove_darkness");
  s.contamination_blobs = count("synth.contamination_blobs");
  s.gray_levels = fixed_reals<synth::kBandCount>(*this, "synth.gray_levels");
  s.noise_sigma = real("synth.noise_sigma");
  s.seed = u64("run.seed");
  s.validate();
  return s;
}

synth::SequenceSpec RunConfig::sequence() const {
  synth::SequenceSpec q;
  q.num_frames = count("synth.sequence_frames");
  q.first_stroke = u64("synth.first_stroke");
  q.stroke_step = u64("synth.stroke_step");
  q.wear_tau = real("synth.wear_tau");
  for (std::size_t c : counts("synth.cleaning_strokes")) q.cleaning_strokes.push_back(c);
  q.validate();
  return q;
}

GridSpec RunConfig::grid() const {
  GridSpec g;
  g.phis = rationals("grid.phis");
  g.batch_sizes = counts("grid.batch_sizes");
  g.epochs = count("grid.epochs");
  g.validate();
  return g;
}

BayesOptSpec RunConfig::bayes() const {
  BayesOptSpec b;
  b.lower = fixed_reals<2>(*this, "bayes.lower");
  b.upper = fixed_reals<2>(*this, "bayes.upper");
  b.initial_samples = count("bayes.initial_samples");
  b.iterations = count("bayes.iterations");
  b.lattice = count("bayes.lattice");
  b.noise_floor = real("bayes.noise_floor");
  b.exploration = real("bayes.exploration");
  b.seed = u64("run.seed");
  b.validate();
  return b;
}

acquisition::PressKinematics RunConfig::kinematics() const {
  acquisition::PressKinematics k;
  k.stroke_length = real("timing.stroke_length_mm") * 1e-3;
  k.strokes_per_minute = real("timing.strokes_per_minute");
  k.exposure = real("timing.exposure_us") * 1e-6;
  k.validate();
  return k;
}

ExtentPolicy RunConfig::extent_policy() const {
  const std::string& v = get("data.extent_policy");
  if (v == "keep") return ExtentPolicy::kKeep;
  if (v == "pad") return ExtentPolicy::kPadToMultiple;
  if (v == "crop") return ExtentPolicy::kCropToMultiple;
  throw bad_value("data.extent_policy", v, "keep, pad or crop");
}

std::array<double, 3> RunConfig::split_fractions() const {
  return fixed_reals<3>(*this, "data.split");
}

}  // namespace wearseg

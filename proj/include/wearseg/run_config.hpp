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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wearseg/acquisition.hpp"
#include "wearseg/augment.hpp"
#include "wearseg/bayesopt.hpp"
#include "wearseg/dataio.hpp"
#include "wearseg/synth.hpp"
#include "wearseg/training.hpp"
#include "wearseg/unet.hpp"

namespace wearseg {

/// Flat `section.key = value` configuration. Every key has a registered
/// default; unknown keys are rejected with their source location. Later
/// assignments win, so flag overrides are applied after the file.
class RunConfig {
 public:
  RunConfig();

  /// Grammar: one `section.key = value` per line; '#' starts a comment;
  /// blank lines are ignored. Lists are comma separated.
  void load_text(const std::string& text, const std::string& source);
  void load_file(const std::filesystem::path& path);
  /// "section.key=value" from the command line.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value, const std::string& source);

  const std::string& get(const std::string& key) const;
  std::string str(const std::string& key) const { return get(key); }
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  bool flag(const std::string& key) const;
  Rational rational(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;
  std::vector<Rational> rationals(const std::string& key) const;
  std::optional<std::filesystem::path> path(const std::string& key) const;

  static const std::vector<std::string>& keys();
  /// Every key in registration order, `key = value` per line.
  std::string canonical_text() const;
  /// FNV-1a 64 of canonical_text().
  std::uint64_t hash() const;

  UNetConfig net() const;
  TrainConfig train() const;
  AugmentSpec augment() const;
  synth::SyntheticSpec synthetic() const;
  synth::SequenceSpec sequence() const;
  GridSpec grid() const;
  BayesOptSpec bayes() const;
  acquisition::PressKinematics kinematics() const;
  ExtentPolicy extent_policy() const;
  std::array<double, 3> split_fractions() const;

 private:
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace wearseg

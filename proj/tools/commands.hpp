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

#include <filesystem>
#include <string>
#include <vector>

#include "wearseg/run_config.hpp"

namespace wearseg::cli {

struct Invocation {
  std::string command;
  RunConfig config;
  std::vector<std::string> argv;
  std::vector<std::filesystem::path> inputs;  // predict only
};

int run_synth(const Invocation& inv);
int run_augment(const Invocation& inv);
int run_train(const Invocation& inv);
int run_continue(const Invocation& inv);
int run_eval(const Invocation& inv);
int run_predict(const Invocation& inv);
int run_series(const Invocation& inv);
int run_grid(const Invocation& inv);
int run_bayes(const Invocation& inv);
int run_timing(const Invocation& inv);

/// Text written to <out_dir>/run_manifest.txt.
std::string manifest_text(const Invocation& inv);

}  // namespace wearseg::cli

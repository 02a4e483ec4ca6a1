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

#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include "commands.hpp"
#include "wearseg/error.hpp"
#include "wearseg/parallel.hpp"
#include "wearseg/version.hpp"

namespace {

using wearseg::cli::Invocation;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out_dir;
  std::vector<std::string> sets;
  std::string data;
  std::string checkpoint;
  std::string subset;
  std::string sequence;
  std::vector<std::string> inputs;
};

// Exit codes: 0 ok, 1 internal, 2 + category index for library errors.
int exit_code(wearseg::ErrorCategory c) { return 2 + static_cast<int>(c); }

void print_error(const char* category, const std::string& message) {
  std::string line = message;
  for (auto& ch : line)
    if (ch == '\n' || ch == '\r') ch = ' ';
  std::fprintf(stderr, "error: %s: %s\n", category, line.c_str());
}

Invocation resolve(const std::string& command, const Flags& f, int argc, char** argv) {
  Invocation inv;
  inv.command = command;
  inv.argv.assign(argv, argv + argc);
  if (!f.config.empty()) inv.config.load_file(f.config);
  for (const auto& s : f.sets) inv.config.apply_override(s);
  if (f.seed) inv.config.set("run.seed", std::to_string(*f.seed), "--seed");
  if (f.threads) inv.config.set("run.threads", std::to_string(*f.threads), "--threads");
  if (!f.out_dir.empty()) inv.config.set("run.out_dir", f.out_dir, "--out-dir");
  if (!f.data.empty()) inv.config.set("data.dir", f.data, "--data");
  if (!f.checkpoint.empty()) inv.config.set("model.checkpoint", f.checkpoint, "--checkpoint");
  if (!f.subset.empty()) inv.config.set("eval.subset", f.subset, "--subset");
  if (!f.sequence.empty()) inv.config.set("series.sequence_dir", f.sequence, "--sequence");
  for (const auto& in : f.inputs) inv.inputs.emplace_back(in);
  wearseg::set_max_threads(static_cast<unsigned>(inv.config.count("run.threads")));
  return inv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Punch wear segmentation toolkit"};
  app.set_version_flag("--version", wearseg::kVersion);
  app.require_subcommand(1);
  Flags flags;

  using Runner = int (*)(const Invocation&);
  const std::vector<std::tuple<std::string, std::string, Runner>> commands = {
      {"synth", "Generate a synthetic image/mask dataset (and optional wear sequence)",
       wearseg::cli::run_synth},
      {"augment", "Write a copy of a dataset with an augmented training subset",
       wearseg::cli::run_augment},
      {"train", "Train a network on a dataset directory", wearseg::cli::run_train},
      {"continue", "Resume training from a checkpoint", wearseg::cli::run_continue},
      {"eval", "Evaluate a checkpoint on one subset and write metrics.csv", wearseg::cli::run_eval},
      {"predict", "Write palette-encoded masks next to input images", wearseg::cli::run_predict},
      {"series", "Per-frame class pixel counts over a wear sequence", wearseg::cli::run_series},
      {"grid", "Grid search over filter factor and batch size", wearseg::cli::run_grid},
      {"bayes", "Bayesian search over adhesive/spalling class weights", wearseg::cli::run_bayes},
      {"timing", "Trigger offsets and motion blur for the press camera", wearseg::cli::run_timing},
  };

  std::map<CLI::App*, std::pair<std::string, Runner>> dispatch;
  for (const auto& [name, help, runner] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "Configuration file (section.key = value)");
    sub->add_option("--seed", flags.seed, "Master seed (run.seed)");
    sub->add_option("--threads", flags.threads, "Worker cap, 0 = all cores (run.threads)");
    sub->add_option("--out-dir", flags.out_dir, "Output directory (run.out_dir)");
    sub->add_option("--set", flags.sets, "Override a config key: section.key=value");
    if (name != "synth" && name != "timing" && name != "predict" && name != "series")
      sub->add_option("--data", flags.data, "Dataset directory (data.dir)");
    if (name == "continue" || name == "eval" || name == "predict" || name == "series")
      sub->add_option("--checkpoint", flags.checkpoint, "Checkpoint file (model.checkpoint)");
    if (name == "eval") sub->add_option("--subset", flags.subset, "train, validation or test");
    if (name == "series")
      sub->add_option("--sequence", flags.sequence, "Sequence directory (series.sequence_dir)");
    if (name == "predict")
      sub->add_option("inputs", flags.inputs, "Image files or directories")->required();
    dispatch[sub] = {name, runner};
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("config", e.what());
    return exit_code(wearseg::ErrorCategory::kConfig);
  }

  for (const auto& [sub, entry] : dispatch) {
    if (!sub->parsed()) continue;
    try {
      const Invocation inv = resolve(entry.first, flags, argc, argv);
      return entry.second(inv);
    } catch (const wearseg::Error& e) {
      print_error(wearseg::category_name(e.category()), e.what());
      return exit_code(e.category());
    } catch (const std::exception& e) {
      print_error("internal", e.what());
      return 1;
    }
  }
  return 1;
}

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

#include <string>

#include "wearseg/synth.hpp"
#include "wearseg/training.hpp"

namespace wearseg::testing {

/// Synthetic items with wear levels spread evenly over [0, 1).
inline std::vector<DatasetItem> synthetic_items(std::size_t n, std::size_t extent, std::uint64_t seed,
                                                const std::string& prefix) {
  std::vector<DatasetItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    synth::SyntheticSpec s;
    s.width = s.height = extent;
    s.seed = derive_seed({seed, i});
    s.wear_level = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    auto smp = synth::generate(s);
    items.push_back({prefix + std::to_string(i), std::move(smp.image), std::move(smp.mask)});
  }
  return items;
}

inline Dataset synthetic_dataset(std::size_t n_train, std::size_t n_val, std::size_t n_test,
                                 std::size_t extent, std::uint64_t seed) {
  Dataset d;
  d.train = synthetic_items(n_train, extent, derive_seed({seed, 1}), "train");
  d.validation = synthetic_items(n_val, extent, derive_seed({seed, 2}), "val");
  d.test = synthetic_items(n_test, extent, derive_seed({seed, 3}), "test");
  return d;
}

}  // namespace wearseg::testing

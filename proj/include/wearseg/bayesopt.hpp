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

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "wearseg/error.hpp"

namespace wearseg {

using Point2 = std::array<double, 2>;

/// Box-constrained maximization of an expensive 2-D objective.
struct BayesOptSpec {
  Point2 lower{1.0, 1.0};
  Point2 upper{10.0, 10.0};
  std::size_t initial_samples = 5;  // uniform random points before the GP takes over
  std::size_t iterations = 20;      // acquisition-driven evaluations afterwards
  std::size_t lattice = 64;         // candidate grid per axis
  double noise_floor = 1e-6;
  double exploration = 0.01;        // EI margin, in standardized units
  std::uint64_t seed = 0;

  void validate() const;
};

struct BayesTraceRow {
  Point2 point{};
  double value = 0.0;
  double incumbent = 0.0;  // best value seen so far, including this row
  bool initial = false;
  double length_scale = 0.0;  // GP length scale used to pick this point (0 for initial)
};

struct BayesResult {
  Point2 best_point{};
  double best_value = 0.0;
  std::vector<BayesTraceRow> trace;
};

/// Gaussian-process surrogate with an isotropic RBF kernel on the unit-scaled
/// box. The length scale maximizes the log marginal likelihood of the trace
/// over a log-spaced grid; expected improvement is maximized over the
/// candidate lattice. A kernel matrix that stays indefinite after jitter
/// escalation raises NumericError.
BayesResult bayes_opt(const BayesOptSpec& spec, const std::function<double(const Point2&)>& objective);

/// GP helper exposed for tests.
struct GpPosterior {
  double mean = 0.0;
  double stddev = 0.0;
};

class GaussianProcess {
 public:
  /// Inputs already scaled to the unit box; targets are standardized
  /// internally. Jitter grows from noise_floor by 10x up to 1e-2.
  GaussianProcess(std::vector<Point2> x, std::vector<double> y, double length_scale,
                  double noise_floor);
  /// Posterior in the original target units.
  GpPosterior predict(const Point2& x) const;
  double log_marginal_likelihood() const { return lml_; }
  double noise() const { return noise_; }

 private:
  std::vector<Point2> x_;
  std::vector<double> alpha_;
  std::vector<double> chol_;  // lower-triangular, row-major n x n
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double length_scale_;
  double noise_ = 0.0;
  double lml_ = 0.0;
};

/// Expected improvement over `best` for maximization.
double expected_improvement(const GpPosterior& p, double best, double margin);

}  // namespace wearseg

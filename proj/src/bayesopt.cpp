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

#include "wearseg/bayesopt.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <numbers>

#include "wearseg/error.hpp"
#include "wearseg/rng.hpp"

namespace wearseg {
namespace {

double rbf(const Point2& a, const Point2& b, double ell) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return std::exp(-(dx * dx + dy * dy) / (2.0 * ell * ell));
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

void BayesOptSpec::validate() const {
  for (int d = 0; d < 2; ++d)
    if (!(upper[d] > lower[d])) throw ConfigError("bayes search box is degenerate along axis " + std::to_string(d));
  if (initial_samples == 0) throw ConfigError("need at least one initial sample");
  if (iterations < initial_samples)
    throw ConfigError("iterations (" + std::to_string(iterations) + ") must be >= initial samples (" +
                      std::to_string(initial_samples) + ")");
  if (lattice < 2) throw ConfigError("candidate lattice needs >= 2 points per axis");
  if (!(noise_floor > 0.0)) throw ConfigError("noise floor must be positive");
}

GaussianProcess::GaussianProcess(std::vector<Point2> x, std::vector<double> y, double length_scale,
                                 double noise_floor)
    : x_(std::move(x)), length_scale_(length_scale) {
  const auto n = static_cast<Eigen::Index>(x_.size());
  if (n == 0 || y.size() != x_.size()) throw ConfigError("GP needs matching, non-empty x and y");
  if (!(noise_floor > 0.0) || !(length_scale > 0.0))
    throw ConfigError("GP noise floor and length scale must be positive");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  y_mean_ = mean;
  y_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = rbf(x_[i], x_[j], length_scale_);
  Eigen::VectorXd ys(n);
  for (Eigen::Index i = 0; i < n; ++i) ys(i) = (y[i] - y_mean_) / y_scale_;

  for (double jitter = noise_floor; jitter <= 1e-2 * 1.0001; jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(kj);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::MatrixXd l = llt.matrixL();
    // Every pivot of K + jI is at least j in exact arithmetic; smaller ones
    // mean round-off has taken over.
    bool ok = true;
    for (Eigen::Index i = 0; i < n; ++i) ok = ok && l(i, i) * l(i, i) >= 0.5 * jitter;
    if (!ok) continue;
    const Eigen::VectorXd alpha = llt.solve(ys);
    noise_ = jitter;
    alpha_.assign(alpha.data(), alpha.data() + n);
    chol_.resize(static_cast<std::size_t>(n * n));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) chol_[static_cast<std::size_t>(i * n + j)] = l(i, j);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(l(i, i));
    lml_ = -0.5 * ys.dot(alpha) - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return;
  }
  throw NumericError("GP kernel matrix is not positive definite even with jitter 1e-2");
}

GpPosterior GaussianProcess::predict(const Point2& x) const {
  const std::size_t n = x_.size();
  std::vector<double> kx(n);
  for (std::size_t i = 0; i < n; ++i) kx[i] = rbf(x, x_[i], length_scale_);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += kx[i] * alpha_[i];
  // v = L^-1 k_x by forward substitution.
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = kx[i];
    for (std::size_t j = 0; j < i; ++j) s -= chol_[i * n + j] * v[j];
    v[i] = s / chol_[i * n + i];
  }
  double var = 1.0;
  for (double e : v) var -= e * e;
  var = std::max(var, 0.0);
  return {y_mean_ + y_scale_ * mean, y_scale_ * std::sqrt(var)};
}

double expected_improvement(const GpPosterior& p, double best, double margin) {
  if (p.stddev < 1e-12) return std::max(0.0, p.mean - best - margin);
  const double gain = p.mean - best - margin;
  const double z = gain / p.stddev;
  return gain * normal_cdf(z) + p.stddev * normal_pdf(z);
}

BayesResult bayes_opt(const BayesOptSpec& spec, const std::function<double(const Point2&)>& objective) {
  spec.validate();
  Rng rng(derive_seed({spec.seed, 0x62617965ULL}));
  BayesResult result;
  std::vector<Point2> unit;  // evaluated points scaled to [0,1]^2
  std::vector<double> values;
  const Point2 span{spec.upper[0] - spec.lower[0], spec.upper[1] - spec.lower[1]};
  auto to_box = [&](const Point2& u) {
    return Point2{spec.lower[0] + span[0] * u[0], spec.lower[1] + span[1] * u[1]};
  };

  auto record = [&](const Point2& u, bool initial, double ell) {
    const Point2 p = to_box(u);
    const double v = objective(p);
    if (!std::isfinite(v)) throw NumericError("bayes objective returned a non-finite value");
    unit.push_back(u);
    values.push_back(v);
    if (result.trace.empty() || v > result.best_value) {
      result.best_value = v;
      result.best_point = p;
    }
    result.trace.push_back({p, v, result.best_value, initial, ell});
  };

  for (std::size_t i = 0; i < spec.initial_samples; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    record({a, b}, true, 0.0);
  }

  const double step = 1.0 / static_cast<double>(spec.lattice - 1);
  for (std::size_t it = 0; it < spec.iterations; ++it) {
    // Length scale by maximum marginal likelihood over a log grid.
    double best_ell = 0.0, best_lml = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < 32; ++g) {
      const double ell = 0.03 * std::pow(100.0, g / 31.0);
      try {
        GaussianProcess gp(unit, values, ell, spec.noise_floor);
        if (gp.log_marginal_likelihood() > best_lml) {
          best_lml = gp.log_marginal_likelihood();
          best_ell = ell;
        }
      } catch (const NumericError&) {
      }
    }
    if (best_ell == 0.0) throw NumericError("no length scale produced a usable GP kernel matrix");
    const GaussianProcess gp(unit, values, best_ell, spec.noise_floor);
    double y_mean = 0.0, y_var = 0.0;
    for (double v : values) y_mean += v;
    y_mean /= static_cast<double>(values.size());
    for (double v : values) y_var += (v - y_mean) * (v - y_mean);
    const double y_scale = std::sqrt(y_var / static_cast<double>(values.size()));
    const double xi = spec.exploration * (y_scale > 0.0 ? y_scale : 1.0);

    Point2 best_u{0.0, 0.0};
    double best_ei = -1.0;
    for (std::size_t i = 0; i < spec.lattice; ++i)
      for (std::size_t j = 0; j < spec.lattice; ++j) {
        const Point2 u{static_cast<double>(i) * step, static_cast<double>(j) * step};
        bool seen = false;
        for (const auto& e : unit) seen = seen || (e[0] == u[0] && e[1] == u[1]);
        if (seen) continue;
        const double ei = expected_improvement(gp.predict(u), result.best_value, xi);
        if (ei > best_ei) {
          best_ei = ei;
          best_u = u;
        }
      }
    record(best_u, false, best_ell);
  }
  return result;
}

}  // namespace wearseg

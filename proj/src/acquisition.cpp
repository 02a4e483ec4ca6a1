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

#include "wearseg/acquisition.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "wearseg/error.hpp"

namespace wearseg::acquisition {

void PressKinematics::validate() const {
  if (!(stroke_length > 0.0)) throw ConfigError("stroke length must be positive");
  if (!(exposure > 0.0)) throw ConfigError("exposure time must be positive");
  if (!(strokes_per_minute >= 100.0 && strokes_per_minute <= 1000.0))
    throw ConfigError("stroke rate " + std::to_string(strokes_per_minute) +
                      " spm is outside the press range [100, 1000]");
}

double PressKinematics::angular_velocity() const {
  return 2.0 * std::numbers::pi * strokes_per_minute / 60.0;
}

double slide_position(const PressKinematics& k, double crank_angle) {
  return 0.5 * k.stroke_length * (1.0 - std::cos(crank_angle));
}

double slide_velocity(const PressKinematics& k, double crank_angle) {
  return 0.5 * k.stroke_length * k.angular_velocity() * std::sin(crank_angle);
}

double exposure_displacement(const PressKinematics& k) {
  const double theta0 = k.trigger_offset;
  const double theta1 = theta0 + k.angular_velocity() * k.exposure;
  // cos a - cos b = 2 sin((a+b)/2) sin((b-a)/2) avoids cancellation near TDC.
  return std::abs(k.stroke_length * std::sin(0.5 * (theta0 + theta1)) *
                  std::sin(0.5 * (theta1 - theta0)));
}

double exposure_displacement_numeric(const PressKinematics& k, int intervals) {
  if (intervals < 2) intervals = 2;
  if (intervals % 2) ++intervals;
  const double omega = k.angular_velocity();
  const double h = k.exposure / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double weight = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += weight * slide_velocity(k, k.trigger_offset + omega * h * i);
  }
  return std::abs(sum * h / 3.0);
}

double solve_trigger_offset(const PressKinematics& k, double target) {
  if (!(target >= 0.0)) throw RangeError("target displacement must be non-negative");
  if (target == 0.0) return 0.0;
  PressKinematics probe = k;
  auto f = [&](double theta) {
    probe.trigger_offset = theta;
    return exposure_displacement(probe);
  };
  double lo = 0.0, hi = std::numbers::pi / 2.0;
  if (target > f(hi))
    throw RangeError("target displacement " + std::to_string(target) +
                     " m exceeds the maximum " + std::to_string(f(hi)) +
                     " m reachable for trigger offsets in [0, pi/2]");
  if (target < f(lo)) return lo;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double v = f(mid);
    if (std::abs(v - target) < 1e-13) return mid;
    (v < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double blur_in_pixels(const PressKinematics& k, double field_of_view, double image_width_px) {
  if (!(field_of_view > 0.0) || !(image_width_px > 0.0))
    throw ConfigError("field of view and image width must be positive");
  return exposure_displacement(k) / (field_of_view / image_width_px);
}

}  // namespace wearseg::acquisition

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

#include "wearseg/error.hpp"

// Press-slide kinematics for deciding when a stroke-synchronous camera can
// expose without visible motion blur. SI units throughout (m, s, rad).
namespace wearseg::acquisition {

struct PressKinematics {
  double stroke_length = 0.035;      // m
  double strokes_per_minute = 600.0;
  double exposure = 50e-6;           // s
  double trigger_offset = 0.0;       // crank angle after top dead center, rad

  /// ConfigError unless stroke_length > 0, exposure > 0 and the stroke rate
  /// lies in [100, 1000] spm.
  void validate() const;
  /// Crank angular velocity, rad/s.
  double angular_velocity() const;
};

/// Ideal crank (infinite connecting rod): x = L/2 (1 - cos theta), measured
/// downward from top dead center.
double slide_position(const PressKinematics& k, double crank_angle);
/// dx/dt = L/2 * omega * sin(theta).
double slide_velocity(const PressKinematics& k, double crank_angle);

/// Distance the slide travels while the shutter is open, starting at the
/// trigger offset. Closed form.
double exposure_displacement(const PressKinematics& k);

/// Same quantity by composite Simpson integration of the velocity.
double exposure_displacement_numeric(const PressKinematics& k, int intervals = 1000);

/// Trigger offset in [0, pi/2] whose exposure displacement equals `target`
/// (bisection, |residual| < 1e-9 m). RangeError when the target is negative
/// or larger than the displacement reachable at pi/2.
double solve_trigger_offset(const PressKinematics& k, double target);

/// Motion blur in pixels for a camera imaging `field_of_view` meters across
/// `image_width_px` pixels.
double blur_in_pixels(const PressKinematics& k, double field_of_view, double image_width_px);

}  // namespace wearseg::acquisition

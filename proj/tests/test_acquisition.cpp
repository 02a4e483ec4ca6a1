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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wearseg/acquisition.hpp"

namespace wearseg::acquisition {
namespace {

constexpr double kUm = 1e-6;
constexpr double kDeg = std::numbers::pi / 180.0;

TEST(Kinematics, DeadCentersAndSymmetry) {
  const PressKinematics k;
  EXPECT_EQ(slide_position(k, 0.0), 0.0);
  EXPECT_EQ(slide_velocity(k, 0.0), 0.0);
  EXPECT_NEAR(slide_position(k, std::numbers::pi), 0.035, 1e-15);
  for (double t : {0.1, 0.7, 1.3, 2.9})
    EXPECT_NEAR(slide_position(k, std::numbers::pi - t), slide_position(k, std::numbers::pi + t), 1e-15);
}

TEST(Kinematics, PeakVelocityAt600Spm) {
  const PressKinematics k;
  EXPECT_NEAR(k.angular_velocity(), 2.0 * std::numbers::pi * 10.0, 1e-12);
  EXPECT_NEAR(slide_velocity(k, std::numbers::pi / 2), 0.0175 * 62.83185307179586, 1e-12);
  EXPECT_NEAR(slide_velocity(k, std::numbers::pi / 2), 1.0996, 1e-4);
}

TEST(Kinematics, Validation) {
  PressKinematics k;
  k.strokes_per_minute = 50;
  EXPECT_THROW(k.validate(), ConfigError);
  k = {};
  k.strokes_per_minute = 1200;
  EXPECT_THROW(k.validate(), ConfigError);
  k = {};
  k.stroke_length = 0.0;
  EXPECT_THROW(k.validate(), ConfigError);
  k = {};
  k.exposure = -1e-6;
  EXPECT_THROW(k.validate(), ConfigError);
}

TEST(Exposure, NearlyStationaryAtTopDeadCenter) {
  const PressKinematics k;
  const double d = exposure_displacement(k);
  EXPECT_LT(d, 0.1 * kUm);
  EXPECT_NEAR(d, 0.0864 * kUm, 0.001 * kUm);
  // Direct difference of positions.
  const double theta = k.angular_velocity() * k.exposure;
  EXPECT_NEAR(d, 0.0175 * (1.0 - std::cos(theta)), 1e-15);
}

TEST(Exposure, ClosedFormMatchesIntegration) {
  PressKinematics k;
  for (double offset : {0.0, 0.05, 0.37, 1.0, 1.5}) {
    k.trigger_offset = offset;
    const double exact = exposure_displacement(k), numeric = exposure_displacement_numeric(k);
    EXPECT_LT(std::abs(exact - numeric), 1e-4 * exact) << offset;
  }
}

TEST(Exposure, VanishesWithExposureTime) {
  PressKinematics k;
  k.trigger_offset = 0.5;
  k.exposure = 1e-12;
  EXPECT_LT(exposure_displacement(k), 1e-12);
}

TEST(TriggerOffset, PublishedTwentyMicrons) {
  PressKinematics k;
  const double theta = solve_trigger_offset(k, 20 * kUm);
  EXPECT_NEAR(theta / kDeg, 21.3, 0.5);
  k.trigger_offset = theta;
  EXPECT_NEAR(exposure_displacement(k), 20 * kUm, 0.1 * kUm);
}

TEST(TriggerOffset, InverseConsistency) {
  for (double d : {1.0, 5.0, 20.0}) {
    PressKinematics k;
    k.trigger_offset = solve_trigger_offset(k, d * kUm);
    EXPECT_NEAR(exposure_displacement(k), d * kUm, 1e-3 * kUm) << d;
  }
  EXPECT_EQ(solve_trigger_offset(PressKinematics{}, 0.0), 0.0);
}

TEST(TriggerOffset, InfeasibleTargetsAreRangeErrors) {
  EXPECT_THROW(solve_trigger_offset(PressKinematics{}, 10.0), RangeError);
  EXPECT_THROW(solve_trigger_offset(PressKinematics{}, -1e-6), RangeError);
}

TEST(Blur, PixelsFromFieldOfView) {
  PressKinematics k;
  k.trigger_offset = solve_trigger_offset(k, 20 * kUm);
  const double px = blur_in_pixels(k, 0.012, 1920);
  EXPECT_NEAR(px, 3.2, 1e-3);
  EXPECT_NEAR(blur_in_pixels(k, 0.012, 3840), 2.0 * px, 1e-12);
  k.exposure = 1e-15;
  EXPECT_LT(blur_in_pixels(k, 0.012, 1920), 1e-6);
}

}  // namespace
}  // namespace wearseg::acquisition

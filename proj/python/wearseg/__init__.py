# Copyright 2026 The wearseg Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Punch wear segmentation toolkit: U-Net training, evaluation and planning."""

from ._wearseg import (
    NUM_CLASSES,
    ConfigError,
    DataError,
    IoError,
    NumericError,
    PressKinematics,
    RangeError,
    SyntheticSpec,
    UNet,
    UNetConfig,
    VersionError,
    WearsegError,
    __version__,
    augment_pair,
    bayes_opt,
    blur_in_pixels,
    confusion_matrix,
    evaluate,
    exposure_displacement,
    generate,
    generate_sequence,
    iou,
    param_count,
    pearson,
    run_config_text,
    set_max_threads,
    solve_trigger_offset,
    train,
    write_synthetic_dataset,
)

CLASS_NAMES = (
    "background",
    "unworn",
    "contamination",
    "grooves",
    "surface_spalling",
    "adhesive_wear",
)

# Copyright 2026 The ionswap Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Ion-crystal swap, shuttling and analysis studies."""

import json

from ._core import (
    CalibrationError,
    CalibrationTargets,
    ConfigError,
    FilterModel,
    FitError,
    PhysicsError,
    RabiDataset,
    SwapRampParams,
    TrapGeometry,
    calibrate,
    config_hash as _config_hash,
    effective_swap_duration,
    filter_step_response,
    fit_phonon_number,
    reorder,
    simulate_swap,
    synthesize_rabi,
    tomography,
    two_ion_modes,
)


def config_hash(config):
    """Hash of a config given as a dict or JSON text; seed and out are ignored."""
    if not isinstance(config, str):
        config = json.dumps(config)
    return _config_hash(config)


__all__ = [
    "CalibrationError",
    "CalibrationTargets",
    "ConfigError",
    "FilterModel",
    "FitError",
    "PhysicsError",
    "RabiDataset",
    "SwapRampParams",
    "TrapGeometry",
    "calibrate",
    "config_hash",
    "effective_swap_duration",
    "filter_step_response",
    "fit_phonon_number",
    "reorder",
    "simulate_swap",
    "synthesize_rabi",
    "tomography",
    "two_ion_modes",
]

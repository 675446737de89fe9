# Copyright 2026 The biasaudit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python access to the biasaudit native core."""

import json as _json

from . import _biasaudit as _core
from ._biasaudit import (
    BiasAuditError,
    apply_corruption,
    build_pseudo_datasets,
    config_hash,
    count_parameters,
    detect_failure,
    enumerate_combinations,
    eval_transform,
    iteration_budget,
    learning_rate_at,
    render_report,
    sample_split,
)

__all__ = [
    "BiasAuditError",
    "aggregate_histogram",
    "apply_corruption",
    "build_pseudo_datasets",
    "config_hash",
    "count_parameters",
    "detect_failure",
    "enumerate_combinations",
    "eval_transform",
    "iteration_budget",
    "learning_rate_at",
    "linear_probe",
    "render_report",
    "sample_split",
]


def linear_probe(train_x, train_y, val_x, val_y, num_classes, epochs=40, seed=0):
    """Linear probe over the default learning-rate sweep. Features are [n, dim]."""
    return _json.loads(_core.linear_probe(train_x, list(train_y), val_x, list(val_y), num_classes, epochs, seed))


def aggregate_histogram(accuracies, bin_width=5.0):
    return _json.loads(_core.aggregate_histogram(list(accuracies), bin_width))

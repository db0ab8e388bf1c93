# Copyright 2026 The widir Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Pairwise contest ranking: model, metrics and the file-based pipeline."""

from ._widir import (
    ConfigError,
    DataError,
    Dims,
    DimensionError,
    Error,
    Params,
    Pipeline,
    build_pairs,
    delta,
    hinge_loss,
    init_params,
    load_params,
    param_count,
    precision_at,
    recall_at,
    zero_params,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Dims",
    "DimensionError",
    "Error",
    "Params",
    "Pipeline",
    "build_pairs",
    "delta",
    "hinge_loss",
    "init_params",
    "load_params",
    "param_count",
    "precision_at",
    "recall_at",
    "zero_params",
]

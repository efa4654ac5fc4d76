# Copyright 2026 The sngd Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Surrogate natural gradient descent: Python bindings to the C++ core."""

from sngd._sngd import (
    ConfigError,
    DomainError,
    Error,
    Family,
    ParseError,
    ShapeError,
    __version__,
    acceptance,
    gradient_suite,
    log_partition,
    map_ids,
    natural_from_standard,
    run_config,
    standard_from_natural,
    sufficient_statistics,
    to_mean,
    to_natural,
)

TRACE_COLUMNS = ("iteration", "wall_ms", "objective", "grad_norm", "step_size", "backtracks")

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "Family",
    "ParseError",
    "ShapeError",
    "TRACE_COLUMNS",
    "__version__",
    "acceptance",
    "gradient_suite",
    "log_partition",
    "map_ids",
    "natural_from_standard",
    "run_config",
    "standard_from_natural",
    "sufficient_statistics",
    "to_mean",
    "to_natural",
]

# Copyright 2026 The texmesh Authors.
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

from ._texmesh import (
    Error,
    InvalidArgument,
    IoError,
    ParseError,
    carve,
    decoupled_pass,
    mesh_summary,
    read_obj,
    region_map,
    remesh,
    run_pipeline,
    set_worker_count,
    write_obj,
)

__all__ = [
    "Error",
    "InvalidArgument",
    "IoError",
    "ParseError",
    "carve",
    "decoupled_pass",
    "mesh_summary",
    "read_obj",
    "region_map",
    "remesh",
    "run_pipeline",
    "set_worker_count",
    "write_obj",
]

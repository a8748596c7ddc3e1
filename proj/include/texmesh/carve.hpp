// Copyright 2026 The texmesh Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "texmesh/field.hpp"
#include "texmesh/mesh.hpp"

namespace texmesh {

// Iso-surface of the grid. Vertices lie on sign-crossing lattice edges and
// are shared between neighbouring cells. Faces are oriented with normals
// pointing from high (inside) to low (outside) values.
TriMesh marching_cubes(const GridField& grid, double iso = 0.5);

// Collapses vertices closer than eps to one representative. Faces that lose
// a corner to the merge are dropped.
TriMesh merge_duplicate_vertices(const TriMesh& mesh, double eps);

TriMesh remove_zero_area_faces(const TriMesh& mesh, double area_eps);

TriMesh remove_unreferenced_vertices(const TriMesh& mesh);

// Drops edge-connected components with fewer than min_face_fraction * F
// faces. The largest component always survives.
TriMesh remove_small_components(const TriMesh& mesh, double min_face_fraction);

struct RepairReport {
  std::size_t removed_faces = 0;
  std::vector<int> removal_order;  // indices into the input mesh
};

// Removes faces on edges with three or more incident faces, smallest area
// first (ties by lower index), until every edge has at most two faces.
TriMesh repair_nonmanifold(const TriMesh& mesh, RepairReport* report = nullptr);

// Unset values are derived from the bounding box diagonal d:
// merge_eps = 1e-6 d, area_eps = 1e-12 d^2.
struct CleanParams {
  std::optional<double> merge_eps;
  std::optional<double> area_eps;
  double min_component_fraction = 0.02;
};

struct CleanReport {
  double merge_eps = 0;
  double area_eps = 0;
  double min_component_fraction = 0;
  std::size_t merged_vertices = 0;
  std::size_t zero_area_faces = 0;
  std::size_t nonmanifold_faces = 0;
  std::size_t small_component_faces = 0;
  std::size_t unreferenced_vertices = 0;
  std::size_t pinched_vertices = 0;  // reported only, not repaired

  std::string to_key_values(const std::string& prefix = "clean.") const;
};

TriMesh clean(const TriMesh& mesh, const CleanParams& params = {},
              CleanReport* report = nullptr);

}  // namespace texmesh

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

#include <string>
#include <vector>

#include "texmesh/mesh.hpp"

namespace texmesh {

enum class VertexAreaKind {
  kBarycentric,  // one third of the incident face areas
  kVoronoi,      // mixed Voronoi cell area
};

struct RemeshParams {
  double target_edge_length = 0.0;
  int iterations = 5;
  double damping = 0.5;
  double split_factor = 4.0 / 3.0;
  double collapse_factor = 4.0 / 5.0;
  VertexAreaKind vertex_area = VertexAreaKind::kBarycentric;

  // Throws InvalidArgument unless l > 0, 0 < damping <= 1, iterations > 0 and
  // split_factor > 1 > collapse_factor > 0.
  void validate() const;
};

// Splits edges longer than `threshold` at their midpoints until none remain.
TriMesh split_long_edges(const TriMesh& mesh, double threshold);

// Collapses edges shorter than `threshold` into their midpoint. A collapse is
// skipped if it would create an edge longer than `max_edge_length`, turn an
// incident face by more than 90 degrees, or violate the link condition.
TriMesh collapse_short_edges(const TriMesh& mesh, double threshold,
                             double max_edge_length);

struct FlipStats {
  std::size_t flips = 0;
  long deviation_before = 0;  // sum over vertices of (valence - target)^2
  long deviation_after = 0;
};

// One pass of valence-improving flips (target 6 inside, 4 on the boundary).
TriMesh equalize_valences(const TriMesh& mesh, FlipStats* stats = nullptr);

struct SmoothStats {
  std::vector<Vec3> displacement;  // per vertex, zero for fixed vertices
  std::vector<Vec3> normal;        // the n_i used for the projection
  double max_normal_component = 0;   // max |dot(dp, n)|
  double max_relative_normal_component = 0;  // max |dot(dp, n)| / |g - p|
};

// Moves every interior vertex towards the area-weighted centroid of its one
// ring, restricted to the vertex tangent plane:
//   p <- p + damping * (I - n n^T) (g - p)
// All updates read the positions from before the call.
TriMesh tangential_smooth(const TriMesh& mesh, double damping,
                          SmoothStats* stats = nullptr,
                          VertexAreaKind area = VertexAreaKind::kBarycentric);

struct RemeshRound {
  int round = 0;
  std::size_t edges = 0;
  double mean_edge = 0;
  double mean_valence = 0;  // interior vertices
  double volume = 0;
  double max_tangent_residual = 0;
  // Edge lengths in bins of 0.1 * target (last bin is open ended).
  std::vector<std::size_t> edge_histogram;
  // Vertex count per valence 0..15 (last bin is open ended).
  std::vector<std::size_t> valence_histogram;
};

struct RemeshReport {
  std::vector<RemeshRound> rounds;
  // "round,edges,mean_edge,mean_valence,volume" plus one row per round.
  std::string to_csv() const;
};

TriMesh isotropic_remesh(const TriMesh& mesh, const RemeshParams& params,
                         RemeshReport* report = nullptr);

std::vector<int> vertex_valences(const TriMesh& mesh);
std::vector<char> boundary_vertices(const TriMesh& mesh);
double mean_edge_length(const TriMesh& mesh);

}  // namespace texmesh

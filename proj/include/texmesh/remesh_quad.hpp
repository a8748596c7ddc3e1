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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "texmesh/mesh.hpp"

namespace texmesh {

// Tangent cross field with symmetry order 4. `dir[i]` is a unit vector
// orthogonal to `normal[i]`; directions rotated by multiples of 90 degrees
// about the normal are equivalent.
struct OrientationField {
  std::vector<Vec3> dir;
  std::vector<Vec3> normal;
};

enum class OrientationInit {
  kAxis,    // projection of a fixed world axis onto each tangent plane
  kRandom,  // uniform random tangent angle per vertex
};

struct OrientationOptions {
  int iterations = 50;
  OrientationInit init = OrientationInit::kAxis;
  std::uint64_t seed = 1;
  // Solve on a hierarchy of greedily matched vertex pairs first and prolong
  // the result before the final sweeps on the input mesh.
  bool multilevel = true;
};

struct FieldReport {
  double initial_energy = 0.0;  // before any smoothing
  std::size_t levels = 0;
  // Energies of the sweeps on the input mesh: energy[0] before the first
  // sweep (after prolongation), energy[k] after sweep k.
  std::vector<double> energy;
  std::size_t rejected_updates = 0;
  std::vector<int> frozen;  // vertices with a degenerate normal
};

// Rotates `v` by the smallest rotation taking `from` to `to` (unit normals).
Vec3 transport(const Vec3& v, const Vec3& from, const Vec3& to);

// The rotation of o_j (after transport into the plane of n_i) closest to o_i.
Vec3 closest_rotation(const Vec3& oi, const Vec3& ni, const Vec3& oj, const Vec3& nj);

// Angle between o_i and closest_rotation(...), in radians.
double rosy_angle(const Vec3& oi, const Vec3& ni, const Vec3& oj, const Vec3& nj);

// Sum over edges of 1 - max_k dot(o_i, rot_k(o_j)).
double orientation_energy(const TriMesh& mesh, const OrientationField& field);

OrientationField optimize_orientation_field(const TriMesh& mesh,
                                            const OrientationOptions& options = {},
                                            FieldReport* report = nullptr);

// Per-vertex lattice anchors. Vertex i carries the lattice
//   anchor[i] + scale * (a * o_i + b * (n_i x o_i)),  a, b integers,
// and anchor[i] is the lattice point nearest the vertex.
struct PositionField {
  std::vector<Vec3> anchor;
  double scale = 0.0;
};

// Integer lattice offset of `d` in the frame (o, n x o).
std::array<long, 2> lattice_offset(const Vec3& d, const Vec3& o, const Vec3& n,
                                   double scale);

// Sum over edges of the squared distance from q_j - q_i to the nearest
// lattice vector, measured in the frame of the lower-indexed endpoint.
double position_energy(const TriMesh& mesh, const OrientationField& orient,
                       const PositionField& pos);

PositionField optimize_position_field(const TriMesh& mesh, const OrientationField& orient,
                                      double scale, int iterations,
                                      FieldReport* report = nullptr,
                                      bool multilevel = true);

struct QuadDominantMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;
  // Output vertices that contain a boundary vertex of the input.
  std::vector<char> boundary;

  std::size_t num_quads() const;
  std::size_t num_triangles() const;
  // Triangles none of whose corners lie on the boundary.
  std::size_t num_interior_triangles() const;
};

struct QuadReport {
  std::size_t sites = 0;
  std::size_t links = 0;
  std::size_t quads = 0;
  std::size_t triangles = 0;
  std::size_t skipped_cycles = 0;  // outer boundary loops
  // Output vertices with a valence other than 4 (interior) or with lattice
  // links that could not be resolved.
  std::vector<int> irregular;
  std::size_t inconsistent_links = 0;

  std::string to_text() const;
};

QuadDominantMesh extract_quads(const TriMesh& mesh, const OrientationField& orient,
                               const PositionField& pos, QuadReport* report = nullptr);

// Fan triangulation, for consumers that need triangles.
TriMesh triangulate(const QuadDominantMesh& mesh);

}  // namespace texmesh

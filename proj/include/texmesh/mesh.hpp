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
#include <vector>

#include "texmesh/common.hpp"

namespace texmesh {

using Face = std::array<int, 3>;

// Indexed triangle mesh. Derived quantities are computed on request rather
// than cached, so a TriMesh is a plain value that is cheap to copy and edit.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return faces.size(); }
  bool empty() const { return faces.empty(); }

  // Unnormalized normal (twice the area, counterclockwise orientation).
  Vec3 face_cross(std::size_t f) const;
  Vec3 face_normal(std::size_t f) const;
  double face_area(std::size_t f) const;
  Vec3 face_centroid(std::size_t f) const;

  std::vector<Vec3> face_normals() const;
  std::vector<double> face_areas() const;
  // Area-weighted average of incident face normals, normalized. Zero for
  // isolated vertices.
  std::vector<Vec3> vertex_normals() const;

  // Throws InvalidArgument when an index is out of range or a face repeats a
  // vertex.
  void validate() const;
};

struct BoundingBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double diagonal() const { return (max - min).norm(); }
};

BoundingBox bounding_box(const std::vector<Vec3>& points);
inline BoundingBox bounding_box(const TriMesh& mesh) {
  return bounding_box(mesh.vertices);
}

// Signed volume enclosed by the mesh (positive for outward orientation).
double enclosed_volume(const TriMesh& mesh);
double surface_area(const TriMesh& mesh);

struct Edge {
  int v0;  // v0 < v1
  int v1;
  std::vector<int> faces;
};

// Undirected edge table with incident-face lists, sorted by (v0, v1).
class EdgeTable {
 public:
  explicit EdgeTable(const TriMesh& mesh);

  const std::vector<Edge>& edges() const { return edges_; }
  // Index into edges() or -1.
  int find(int a, int b) const;
  std::size_t count_with_faces(std::size_t min_faces) const;
  std::size_t boundary_edge_count() const;
  std::size_t nonmanifold_edge_count() const { return count_with_faces(3); }
  bool is_closed_manifold() const;

 private:
  std::vector<Edge> edges_;
};

// Vertex to incident-face lists plus one-ring neighbours.
class VertexAdjacency {
 public:
  explicit VertexAdjacency(const TriMesh& mesh);

  const std::vector<int>& faces_of(int v) const { return vertex_faces_[v]; }
  const std::vector<int>& neighbors_of(int v) const { return neighbors_[v]; }

 private:
  std::vector<std::vector<int>> vertex_faces_;
  std::vector<std::vector<int>> neighbors_;
};

inline long euler_characteristic(const TriMesh& mesh, const EdgeTable& edges) {
  return static_cast<long>(mesh.num_vertices()) -
         static_cast<long>(edges.edges().size()) +
         static_cast<long>(mesh.num_faces());
}

// Vertices whose incident faces do not form a single edge-connected fan.
std::size_t count_pinched_vertices(const TriMesh& mesh);

// Largest deviation of |v - center| from radius over all vertices.
double max_radial_deviation(const TriMesh& mesh, const Vec3& center, double radius);

}  // namespace texmesh

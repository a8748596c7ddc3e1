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

#include <utility>
#include <vector>

#include "texmesh/mesh.hpp"

namespace texmesh::detail {

// Face-list mesh with vertex-to-face incidence, supporting local topology
// edits (split, collapse, flip). Deleted elements are tombstoned and dropped
// by to_trimesh().
class EditableMesh {
 public:
  explicit EditableMesh(const TriMesh& mesh);

  TriMesh to_trimesh() const;

  std::size_t vertex_slots() const { return pos_.size(); }
  std::size_t face_slots() const { return faces_.size(); }
  bool vertex_alive(int v) const { return vert_alive_[v] != 0; }
  bool face_alive(int f) const { return face_alive_[f] != 0; }
  const Vec3& position(int v) const { return pos_[v]; }
  void set_position(int v, const Vec3& p) { pos_[v] = p; }
  const Face& face(int f) const { return faces_[f]; }
  const std::vector<int>& faces_of(int v) const { return vf_[v]; }

  // Alive faces containing both a and b.
  void edge_faces(int a, int b, std::vector<int>& out) const;
  int edge_face_count(int a, int b) const;
  bool has_edge(int a, int b) const { return edge_face_count(a, b) > 0; }
  bool is_boundary_vertex(int v) const;
  void neighbors(int v, std::vector<int>& out) const;
  int valence(int v) const;

  // Unique undirected edges (a < b) of alive faces, sorted.
  std::vector<std::pair<int, int>> edges() const;

  // Inserts the midpoint of edge (a, b), splitting its incident faces.
  int split_edge(int a, int b);

  // Checks link condition, normal flips and maximal new edge length for
  // collapsing `from` into `to` placed at `target`.
  bool can_collapse(int from, int to, const Vec3& target, double max_edge_length) const;
  void collapse(int from, int to, const Vec3& target);

  // For an interior edge (a, b) returns the two opposite vertices, or false.
  bool flip_candidates(int a, int b, int* c, int* d) const;
  bool can_flip(int a, int b) const;
  void flip(int a, int b);

 private:
  void remove_face(int f);
  static void erase_value(std::vector<int>& v, int x);

  std::vector<Vec3> pos_;
  std::vector<char> vert_alive_;
  std::vector<Face> faces_;
  std::vector<char> face_alive_;
  std::vector<std::vector<int>> vf_;
};

}  // namespace texmesh::detail

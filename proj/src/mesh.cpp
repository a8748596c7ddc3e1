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

#include "texmesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace texmesh {

Vec3 TriMesh::face_cross(std::size_t f) const {
  const Face& t = faces[f];
  const Vec3& a = vertices[t[0]];
  return (vertices[t[1]] - a).cross(vertices[t[2]] - a);
}

Vec3 TriMesh::face_normal(std::size_t f) const {
  const Vec3 c = face_cross(f);
  const double n = c.norm();
  return n > 0 ? Vec3(c / n) : Vec3::Zero();
}

double TriMesh::face_area(std::size_t f) const { return 0.5 * face_cross(f).norm(); }

Vec3 TriMesh::face_centroid(std::size_t f) const {
  const Face& t = faces[f];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

std::vector<Vec3> TriMesh::face_normals() const {
  std::vector<Vec3> out(faces.size());
  parallel_for(faces.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t f = b; f < e; ++f) out[f] = face_normal(f);
  });
  return out;
}

std::vector<double> TriMesh::face_areas() const {
  std::vector<double> out(faces.size());
  parallel_for(faces.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t f = b; f < e; ++f) out[f] = face_area(f);
  });
  return out;
}

std::vector<Vec3> TriMesh::vertex_normals() const {
  std::vector<Vec3> acc(vertices.size(), Vec3::Zero());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Vec3 c = face_cross(f);  // |c| = 2 * area
    for (int v : faces[f]) acc[v] += c;
  }
  for (Vec3& n : acc) {
    const double len = n.norm();
    n = len > 0 ? Vec3(n / len) : Vec3::Zero();
  }
  return acc;
}

void TriMesh::validate() const {
  const int n = static_cast<int>(vertices.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    for (int v : t) {
      if (v < 0 || v >= n) {
        throw InvalidArgument("face " + std::to_string(f) + " references vertex " +
                              std::to_string(v) + " of " + std::to_string(n));
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw InvalidArgument("face " + std::to_string(f) + " repeats a vertex");
    }
  }
}

BoundingBox bounding_box(const std::vector<Vec3>& points) {
  BoundingBox box;
  if (points.empty()) return box;
  box.min = box.max = points.front();
  for (const Vec3& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

double enclosed_volume(const TriMesh& mesh) {
  double vol = 0;
  for (const Face& t : mesh.faces) {
    vol += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
  }
  return vol / 6.0;
}

double surface_area(const TriMesh& mesh) {
  double a = 0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) a += mesh.face_area(f);
  return a;
}

EdgeTable::EdgeTable(const TriMesh& mesh) {
  struct Entry {
    std::uint64_t key;
    int face;
  };
  std::vector<Entry> entries;
  entries.reserve(mesh.faces.size() * 3);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      const auto a = static_cast<std::uint32_t>(std::min(t[k], t[(k + 1) % 3]));
      const auto b = static_cast<std::uint32_t>(std::max(t[k], t[(k + 1) % 3]));
      entries.push_back({(static_cast<std::uint64_t>(a) << 32) | b, static_cast<int>(f)});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return x.key != y.key ? x.key < y.key : x.face < y.face;
  });
  for (std::size_t i = 0; i < entries.size();) {
    Edge e;
    e.v0 = static_cast<int>(entries[i].key >> 32);
    e.v1 = static_cast<int>(entries[i].key & 0xffffffffu);
    std::size_t j = i;
    while (j < entries.size() && entries[j].key == entries[i].key) {
      e.faces.push_back(entries[j].face);
      ++j;
    }
    edges_.push_back(std::move(e));
    i = j;
  }
}

int EdgeTable::find(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{a, b},
                             [](const Edge& e, const std::pair<int, int>& k) {
                               return e.v0 != k.first ? e.v0 < k.first : e.v1 < k.second;
                             });
  if (it == edges_.end() || it->v0 != a || it->v1 != b) return -1;
  return static_cast<int>(it - edges_.begin());
}

std::size_t EdgeTable::count_with_faces(std::size_t min_faces) const {
  return static_cast<std::size_t>(std::count_if(
      edges_.begin(), edges_.end(),
      [min_faces](const Edge& e) { return e.faces.size() >= min_faces; }));
}

std::size_t EdgeTable::boundary_edge_count() const {
  return static_cast<std::size_t>(std::count_if(
      edges_.begin(), edges_.end(), [](const Edge& e) { return e.faces.size() == 1; }));
}

bool EdgeTable::is_closed_manifold() const {
  return !edges_.empty() && std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) {
    return e.faces.size() == 2;
  });
}

VertexAdjacency::VertexAdjacency(const TriMesh& mesh)
    : vertex_faces_(mesh.vertices.size()), neighbors_(mesh.vertices.size()) {
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (int v : mesh.faces[f]) vertex_faces_[v].push_back(static_cast<int>(f));
  }
  for (std::size_t v = 0; v < vertex_faces_.size(); ++v) {
    auto& ring = neighbors_[v];
    for (int f : vertex_faces_[v]) {
      for (int u : mesh.faces[f]) {
        if (u != static_cast<int>(v)) ring.push_back(u);
      }
    }
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
  }
}

std::size_t count_pinched_vertices(const TriMesh& mesh) {
  const VertexAdjacency adj(mesh);
  std::size_t pinched = 0;
  std::vector<int> parent;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const auto& fs = adj.faces_of(static_cast<int>(v));
    if (fs.size() < 2) continue;
    parent.resize(fs.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    // Two faces around v are fan-connected if they share another vertex.
    for (std::size_t a = 0; a < fs.size(); ++a) {
      for (std::size_t b = a + 1; b < fs.size(); ++b) {
        const Face& fa = mesh.faces[fs[a]];
        const Face& fb = mesh.faces[fs[b]];
        bool share = false;
        for (int x : fa) {
          if (x == static_cast<int>(v)) continue;
          for (int y : fb) share |= (x == y);
        }
        if (share) parent[root(static_cast<int>(a))] = root(static_cast<int>(b));
      }
    }
    int roots = 0;
    for (std::size_t a = 0; a < fs.size(); ++a) roots += root(static_cast<int>(a)) == static_cast<int>(a);
    if (roots > 1) ++pinched;
  }
  return pinched;
}

double max_radial_deviation(const TriMesh& mesh, const Vec3& center, double radius) {
  double worst = 0;
  for (const Vec3& v : mesh.vertices) {
    worst = std::max(worst, std::abs((v - center).norm() - radius));
  }
  return worst;
}

}  // namespace texmesh

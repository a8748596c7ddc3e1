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

#include "editable_mesh.hpp"

#include <algorithm>

namespace texmesh::detail {

namespace {

bool contains(const Face& f, int v) { return f[0] == v || f[1] == v || f[2] == v; }

Vec3 cross_of(const Vec3& a, const Vec3& b, const Vec3& c) { return (b - a).cross(c - a); }

}  // namespace

EditableMesh::EditableMesh(const TriMesh& mesh)
    : pos_(mesh.vertices),
      vert_alive_(mesh.vertices.size(), 1),
      faces_(mesh.faces),
      face_alive_(mesh.faces.size(), 1),
      vf_(mesh.vertices.size()) {
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    for (int v : faces_[f]) vf_[v].push_back(static_cast<int>(f));
  }
}

TriMesh EditableMesh::to_trimesh() const {
  TriMesh out;
  std::vector<int> remap(pos_.size(), -1);
  for (std::size_t v = 0; v < pos_.size(); ++v) {
    if (!vert_alive_[v]) continue;
    remap[v] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(pos_[v]);
  }
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    if (!face_alive_[f]) continue;
    const Face& t = faces_[f];
    out.faces.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  }
  return out;
}

void EditableMesh::edge_faces(int a, int b, std::vector<int>& out) const {
  out.clear();
  for (int f : vf_[a]) {
    if (contains(faces_[f], b)) out.push_back(f);
  }
}

int EditableMesh::edge_face_count(int a, int b) const {
  int n = 0;
  for (int f : vf_[a]) n += contains(faces_[f], b) ? 1 : 0;
  return n;
}

bool EditableMesh::is_boundary_vertex(int v) const {
  for (int f : vf_[v]) {
    for (int u : faces_[f]) {
      if (u != v && edge_face_count(v, u) == 1) return true;
    }
  }
  return false;
}

void EditableMesh::neighbors(int v, std::vector<int>& out) const {
  out.clear();
  for (int f : vf_[v]) {
    for (int u : faces_[f]) {
      if (u != v) out.push_back(u);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

int EditableMesh::valence(int v) const {
  std::vector<int> n;
  neighbors(v, n);
  return static_cast<int>(n.size());
}

std::vector<std::pair<int, int>> EditableMesh::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(faces_.size() * 3 / 2 + 8);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    if (!face_alive_[f]) continue;
    const Face& t = faces_[f];
    for (int k = 0; k < 3; ++k) out.emplace_back(std::minmax(t[k], t[(k + 1) % 3]));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void EditableMesh::erase_value(std::vector<int>& v, int x) {
  auto it = std::find(v.begin(), v.end(), x);
  if (it != v.end()) {
    *it = v.back();
    v.pop_back();
  }
}

void EditableMesh::remove_face(int f) {
  face_alive_[f] = 0;
  for (int v : faces_[f]) erase_value(vf_[v], f);
}

int EditableMesh::split_edge(int a, int b) {
  std::vector<int> fs;
  edge_faces(a, b, fs);
  const int m = static_cast<int>(pos_.size());
  pos_.push_back(0.5 * (pos_[a] + pos_[b]));
  vert_alive_.push_back(1);
  vf_.emplace_back();
  for (int f : fs) {
    Face t = faces_[f];
    // Rotate so the split edge is (t[0], t[1]).
    while (!((t[0] == a && t[1] == b) || (t[0] == b && t[1] == a))) {
      t = {t[1], t[2], t[0]};
    }
    const int x = t[0], y = t[1], c = t[2];
    faces_[f] = {x, m, c};
    const int g = static_cast<int>(faces_.size());
    faces_.push_back({m, y, c});
    face_alive_.push_back(1);
    erase_value(vf_[y], f);
    vf_[y].push_back(g);
    vf_[c].push_back(g);
    vf_[m].push_back(f);
    vf_[m].push_back(g);
  }
  return m;
}

bool EditableMesh::can_collapse(int from, int to, const Vec3& target,
                                double max_edge_length) const {
  std::vector<int> shared;
  edge_faces(from, to, shared);
  if (shared.empty() || shared.size() > 2) return false;

  const bool edge_on_boundary = shared.size() == 1;
  const bool from_boundary = is_boundary_vertex(from);
  const bool to_boundary = is_boundary_vertex(to);
  // Two boundary vertices joined through the interior would pinch the mesh.
  if (from_boundary && to_boundary && !edge_on_boundary) return false;

  // Link condition: common neighbours are exactly the opposite vertices.
  std::vector<int> nf, nt;
  neighbors(from, nf);
  neighbors(to, nt);
  std::vector<int> common;
  std::set_intersection(nf.begin(), nf.end(), nt.begin(), nt.end(),
                        std::back_inserter(common));
  std::vector<int> opposite;
  for (int f : shared) {
    for (int v : faces_[f]) {
      if (v != from && v != to) opposite.push_back(v);
    }
  }
  std::sort(opposite.begin(), opposite.end());
  if (common != opposite) return false;

  for (int c : opposite) {
    const int min_valence = is_boundary_vertex(c) ? 3 : 4;
    if (valence(c) < min_valence) return false;
  }
  if (vf_[from].size() + vf_[to].size() <= 2 * shared.size()) return false;

  const double max_sq = max_edge_length * max_edge_length;
  for (int u : nf) {
    if (u != to && (pos_[u] - target).squaredNorm() > max_sq) return false;
  }
  for (int u : nt) {
    if (u != from && (pos_[u] - target).squaredNorm() > max_sq) return false;
  }

  auto face_turns_over = [&](int f) {
    const Face& t = faces_[f];
    Vec3 p[3];
    for (int k = 0; k < 3; ++k) {
      p[k] = (t[k] == from || t[k] == to) ? target : pos_[t[k]];
    }
    const Vec3 before = cross_of(pos_[t[0]], pos_[t[1]], pos_[t[2]]);
    const Vec3 after = cross_of(p[0], p[1], p[2]);
    const double scale = std::max(before.squaredNorm(), 1e-300);
    if (after.squaredNorm() <= 1e-12 * scale) return true;
    return before.dot(after) <= 0.0;
  };
  for (int v : {from, to}) {
    for (int f : vf_[v]) {
      if (contains(faces_[f], from) && contains(faces_[f], to)) continue;
      if (face_turns_over(f)) return false;
    }
  }
  return true;
}

void EditableMesh::collapse(int from, int to, const Vec3& target) {
  const std::vector<int> around = vf_[from];
  for (int f : around) {
    if (contains(faces_[f], to)) {
      remove_face(f);
    }
  }
  for (int f : vf_[from]) {
    for (int& v : faces_[f]) {
      if (v == from) v = to;
    }
    vf_[to].push_back(f);
  }
  vf_[from].clear();
  vert_alive_[from] = 0;
  pos_[to] = target;
}

bool EditableMesh::flip_candidates(int a, int b, int* c, int* d) const {
  std::vector<int> fs;
  edge_faces(a, b, fs);
  if (fs.size() != 2) return false;
  int fab = -1, fba = -1;
  for (int f : fs) {
    const Face& t = faces_[f];
    for (int k = 0; k < 3; ++k) {
      if (t[k] == a && t[(k + 1) % 3] == b) fab = f;
      if (t[k] == b && t[(k + 1) % 3] == a) fba = f;
    }
  }
  if (fab < 0 || fba < 0) return false;  // inconsistent orientation
  for (int v : faces_[fab]) {
    if (v != a && v != b) *c = v;
  }
  for (int v : faces_[fba]) {
    if (v != a && v != b) *d = v;
  }
  return *c != *d;
}

bool EditableMesh::can_flip(int a, int b) const {
  int c = -1, d = -1;
  if (!flip_candidates(a, b, &c, &d)) return false;
  if (has_edge(c, d)) return false;
  for (int v : {a, b}) {
    const int min_valence = is_boundary_vertex(v) ? 3 : 4;
    if (valence(v) < min_valence) return false;
  }
  const Vec3 old1 = cross_of(pos_[a], pos_[b], pos_[c]);
  const Vec3 old2 = cross_of(pos_[b], pos_[a], pos_[d]);
  const Vec3 new1 = cross_of(pos_[c], pos_[a], pos_[d]);
  const Vec3 new2 = cross_of(pos_[d], pos_[b], pos_[c]);
  const double scale = std::max(old1.squaredNorm() + old2.squaredNorm(), 1e-300);
  if (new1.squaredNorm() <= 1e-12 * scale || new2.squaredNorm() <= 1e-12 * scale) {
    return false;
  }
  const Vec3 reference = old1 + old2;
  return new1.dot(new2) > 0 && new1.dot(reference) > 0 && new2.dot(reference) > 0;
}

void EditableMesh::flip(int a, int b) {
  int c = -1, d = -1;
  flip_candidates(a, b, &c, &d);
  std::vector<int> fs;
  edge_faces(a, b, fs);
  int fab = -1, fba = -1;
  for (int f : fs) {
    const Face& t = faces_[f];
    for (int k = 0; k < 3; ++k) {
      if (t[k] == a && t[(k + 1) % 3] == b) fab = f;
      if (t[k] == b && t[(k + 1) % 3] == a) fba = f;
    }
  }
  faces_[fab] = {c, a, d};
  faces_[fba] = {d, b, c};
  erase_value(vf_[b], fab);
  erase_value(vf_[a], fba);
  vf_[d].push_back(fab);
  vf_[c].push_back(fba);
}

}  // namespace texmesh::detail

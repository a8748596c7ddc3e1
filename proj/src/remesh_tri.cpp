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

#include "texmesh/remesh_tri.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "editable_mesh.hpp"

namespace texmesh {

using detail::EditableMesh;

void RemeshParams::validate() const {
  if (!(target_edge_length > 0) || !std::isfinite(target_edge_length)) {
    throw InvalidArgument("target edge length must be positive");
  }
  if (!(damping > 0 && damping <= 1)) throw InvalidArgument("damping must be in (0,1]");
  if (iterations <= 0) throw InvalidArgument("iterations must be positive");
  if (!(split_factor > 1 && collapse_factor < 1 && collapse_factor > 0)) {
    throw InvalidArgument("need split_factor > 1 > collapse_factor > 0");
  }
}

namespace {

void split_pass(EditableMesh& m, double threshold) {
  const double sq = threshold * threshold;
  for (;;) {
    bool changed = false;
    for (auto [a, b] : m.edges()) {
      if ((m.position(a) - m.position(b)).squaredNorm() > sq) {
        m.split_edge(a, b);
        changed = true;
      }
    }
    if (!changed) break;
  }
}

void collapse_pass(EditableMesh& m, double threshold, double max_edge_length) {
  const double sq = threshold * threshold;
  for (;;) {
    bool changed = false;
    for (auto [a, b] : m.edges()) {
      if (!m.vertex_alive(a) || !m.vertex_alive(b) || !m.has_edge(a, b)) continue;
      if ((m.position(a) - m.position(b)).squaredNorm() >= sq) continue;
      int from = a, to = b;
      const bool a_boundary = m.is_boundary_vertex(a);
      const bool b_boundary = m.is_boundary_vertex(b);
      Vec3 target = 0.5 * (m.position(a) + m.position(b));
      // Interior vertices collapse onto the boundary, not the other way round.
      if (a_boundary != b_boundary) {
        if (a_boundary) std::swap(from, to);
        target = m.position(to);
      }
      if (m.can_collapse(from, to, target, max_edge_length)) {
        m.collapse(from, to, target);
        changed = true;
      }
    }
    if (!changed) break;
  }
}

int valence_target(const EditableMesh& m, int v) { return m.is_boundary_vertex(v) ? 4 : 6; }

long total_deviation(const EditableMesh& m) {
  long sum = 0;
  for (std::size_t v = 0; v < m.vertex_slots(); ++v) {
    if (!m.vertex_alive(static_cast<int>(v)) || m.faces_of(static_cast<int>(v)).empty()) {
      continue;
    }
    const long d = m.valence(static_cast<int>(v)) - valence_target(m, static_cast<int>(v));
    sum += d * d;
  }
  return sum;
}

std::size_t flip_pass(EditableMesh& m) {
  std::size_t flips = 0;
  for (auto [a, b] : m.edges()) {
    if (!m.has_edge(a, b)) continue;
    int c = -1, d = -1;
    if (!m.flip_candidates(a, b, &c, &d)) continue;
    const int va = m.valence(a), vb = m.valence(b), vc = m.valence(c), vd = m.valence(d);
    const int ta = valence_target(m, a), tb = valence_target(m, b);
    const int tc = valence_target(m, c), td = valence_target(m, d);
    auto sq = [](int x) { return x * x; };
    const int before = sq(va - ta) + sq(vb - tb) + sq(vc - tc) + sq(vd - td);
    const int after = sq(va - 1 - ta) + sq(vb - 1 - tb) + sq(vc + 1 - tc) + sq(vd + 1 - td);
    if (after < before && m.can_flip(a, b)) {
      m.flip(a, b);
      ++flips;
    }
  }
  return flips;
}

std::vector<double> vertex_areas(const TriMesh& mesh, VertexAreaKind kind) {
  std::vector<double> area(mesh.vertices.size(), 0.0);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& t = mesh.faces[f];
    const double a = mesh.face_area(f);
    if (kind == VertexAreaKind::kBarycentric || a <= 0) {
      for (int v : t) area[v] += a / 3.0;
      continue;
    }
    // Mixed Voronoi area: circumcentric split for non-obtuse triangles,
    // half/quarter split otherwise.
    const Vec3& p0 = mesh.vertices[t[0]];
    const Vec3& p1 = mesh.vertices[t[1]];
    const Vec3& p2 = mesh.vertices[t[2]];
    const Vec3 P[3] = {p0, p1, p2};
    int obtuse = -1;
    for (int k = 0; k < 3; ++k) {
      if ((P[(k + 1) % 3] - P[k]).dot(P[(k + 2) % 3] - P[k]) < 0) obtuse = k;
    }
    if (obtuse >= 0) {
      for (int k = 0; k < 3; ++k) area[t[k]] += (k == obtuse ? 0.5 : 0.25) * a;
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      const Vec3& pi = P[k];
      const Vec3& pj = P[(k + 1) % 3];
      const Vec3& pk = P[(k + 2) % 3];
      auto cot = [](const Vec3& u, const Vec3& v) {
        return u.dot(v) / std::max(u.cross(v).norm(), 1e-300);
      };
      const double cot_k = cot(pi - pk, pj - pk);
      const double cot_j = cot(pi - pj, pk - pj);
      area[t[k]] += 0.125 * ((pj - pi).squaredNorm() * cot_k + (pk - pi).squaredNorm() * cot_j);
    }
  }
  return area;
}

RemeshRound round_stats(const TriMesh& mesh, double target, int round) {
  RemeshRound r;
  r.round = round;
  const EdgeTable edges(mesh);
  r.edges = edges.edges().size();
  r.edge_histogram.assign(21, 0);
  double sum = 0;
  for (const Edge& e : edges.edges()) {
    const double len = (mesh.vertices[e.v0] - mesh.vertices[e.v1]).norm();
    sum += len;
    const auto bin = static_cast<std::size_t>(std::min(20.0, std::floor(len / (0.1 * target))));
    ++r.edge_histogram[bin];
  }
  r.mean_edge = r.edges ? sum / static_cast<double>(r.edges) : 0.0;
  const std::vector<int> valence = vertex_valences(mesh);
  const std::vector<char> boundary = boundary_vertices(mesh);
  r.valence_histogram.assign(16, 0);
  double vsum = 0;
  std::size_t interior = 0;
  for (std::size_t v = 0; v < valence.size(); ++v) {
    ++r.valence_histogram[std::min(15, valence[v])];
    if (!boundary[v] && valence[v] > 0) {
      vsum += valence[v];
      ++interior;
    }
  }
  r.mean_valence = interior ? vsum / static_cast<double>(interior) : 0.0;
  r.volume = enclosed_volume(mesh);
  return r;
}

}  // namespace

TriMesh split_long_edges(const TriMesh& mesh, double threshold) {
  if (!(threshold > 0)) throw InvalidArgument("split threshold must be positive");
  EditableMesh m(mesh);
  split_pass(m, threshold);
  return m.to_trimesh();
}

TriMesh collapse_short_edges(const TriMesh& mesh, double threshold,
                             double max_edge_length) {
  EditableMesh m(mesh);
  collapse_pass(m, threshold, max_edge_length);
  return m.to_trimesh();
}

TriMesh equalize_valences(const TriMesh& mesh, FlipStats* stats) {
  EditableMesh m(mesh);
  FlipStats s;
  s.deviation_before = total_deviation(m);
  s.flips = flip_pass(m);
  s.deviation_after = total_deviation(m);
  if (stats) *stats = s;
  return m.to_trimesh();
}

TriMesh tangential_smooth(const TriMesh& mesh, double damping, SmoothStats* stats,
                          VertexAreaKind area_kind) {
  if (!(damping > 0 && damping <= 1)) throw InvalidArgument("damping must be in (0,1]");
  const std::size_t n = mesh.vertices.size();
  const std::vector<double> area = vertex_areas(mesh, area_kind);
  const std::vector<Vec3> normal = mesh.vertex_normals();
  const std::vector<char> boundary = boundary_vertices(mesh);
  const VertexAdjacency adj(mesh);

  std::vector<Vec3> delta(n, Vec3::Zero());
  std::vector<double> residual(n, 0.0), relative(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& ring = adj.neighbors_of(static_cast<int>(i));
      if (boundary[i] || ring.empty() || normal[i].squaredNorm() == 0) continue;
      Vec3 weighted = Vec3::Zero();
      double total = 0;
      for (int j : ring) {
        weighted += area[j] * mesh.vertices[j];
        total += area[j];
      }
      if (!(total > 0)) continue;
      const Vec3 g = weighted / total;
      const Vec3& p = mesh.vertices[i];
      const Vec3& nrm = normal[i];
      const Vec3 u = g - p;
      delta[i] = damping * (u - nrm * nrm.dot(u));
      residual[i] = std::abs(delta[i].dot(nrm));
      const double len = u.norm();
      relative[i] = len > 0 ? residual[i] / len : 0.0;
    }
  });

  TriMesh out = mesh;
  for (std::size_t i = 0; i < n; ++i) out.vertices[i] += delta[i];
  if (stats) {
    stats->displacement = delta;
    stats->normal = normal;
    stats->max_normal_component = *std::max_element(residual.begin(), residual.end());
    stats->max_relative_normal_component =
        *std::max_element(relative.begin(), relative.end());
  }
  return out;
}

TriMesh isotropic_remesh(const TriMesh& mesh, const RemeshParams& params,
                         RemeshReport* report) {
  params.validate();
  const double target = params.target_edge_length;
  const double high = params.split_factor * target;
  const double low = params.collapse_factor * target;
  TriMesh current = mesh;
  RemeshReport local;
  for (int round = 1; round <= params.iterations; ++round) {
    EditableMesh m(current);
    split_pass(m, high);
    collapse_pass(m, low, high);
    flip_pass(m);
    SmoothStats smooth;
    current = tangential_smooth(m.to_trimesh(), params.damping, &smooth, params.vertex_area);
    RemeshRound r = round_stats(current, target, round);
    r.max_tangent_residual = smooth.max_normal_component;
    local.rounds.push_back(std::move(r));
  }
  if (report) *report = std::move(local);
  return current;
}

std::string RemeshReport::to_csv() const {
  std::ostringstream os;
  os.precision(9);
  os << "round,edges,mean_edge,mean_valence,volume\n";
  for (const RemeshRound& r : rounds) {
    os << r.round << "," << r.edges << "," << r.mean_edge << "," << r.mean_valence << ","
       << r.volume << "\n";
  }
  return os.str();
}

std::vector<int> vertex_valences(const TriMesh& mesh) {
  const VertexAdjacency adj(mesh);
  std::vector<int> out(mesh.vertices.size());
  for (std::size_t v = 0; v < out.size(); ++v) {
    out[v] = static_cast<int>(adj.neighbors_of(static_cast<int>(v)).size());
  }
  return out;
}

std::vector<char> boundary_vertices(const TriMesh& mesh) {
  std::vector<char> out(mesh.vertices.size(), 0);
  const EdgeTable edges(mesh);
  for (const Edge& e : edges.edges()) {
    if (e.faces.size() == 1) out[e.v0] = out[e.v1] = 1;
  }
  return out;
}

double mean_edge_length(const TriMesh& mesh) {
  const EdgeTable edges(mesh);
  if (edges.edges().empty()) return 0.0;
  double sum = 0;
  for (const Edge& e : edges.edges()) sum += (mesh.vertices[e.v0] - mesh.vertices[e.v1]).norm();
  return sum / static_cast<double>(edges.edges().size());
}

}  // namespace texmesh

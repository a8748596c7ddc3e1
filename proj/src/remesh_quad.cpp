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

#include "texmesh/remesh_quad.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace texmesh {

namespace {

constexpr double kDegenerateNormal = 1e-12;

Vec3 any_tangent(const Vec3& n) {
  // Fixed axis with a fallback when the normal is (anti)parallel to it.
  Vec3 axis(1.0, 0.3, 0.1);
  Vec3 t = axis - n.dot(axis) * n;
  if (t.squaredNorm() < 1e-8) {
    axis = Vec3(0.0, 1.0, 0.0);
    t = axis - n.dot(axis) * n;
  }
  return t.normalized();
}

// Highest dot product between o_i and the four rotations of (transported) o_j.
double best_alignment(const Vec3& oi, const Vec3& ni, const Vec3& oj, const Vec3& nj) {
  const Vec3 t = transport(oj, nj, ni);
  const double a = oi.dot(t);
  const double b = oi.dot(ni.cross(t));
  return std::max(std::abs(a), std::abs(b));
}

std::vector<std::pair<int, int>> unique_edges(const TriMesh& mesh) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(mesh.num_faces() * 3);
  for (const Face& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

std::vector<std::vector<int>> neighbor_lists(const TriMesh& mesh) {
  std::vector<std::vector<int>> nb(mesh.num_vertices());
  for (auto [a, b] : unique_edges(mesh)) {
    nb[a].push_back(b);
    nb[b].push_back(a);
  }
  return nb;
}

double orientation_edge(const OrientationField& f, int a, int b) {
  if (a > b) std::swap(a, b);
  return std::max(0.0, 1.0 - best_alignment(f.dir[a], f.normal[a], f.dir[b], f.normal[b]));
}

Vec3 lattice_vector(const std::array<long, 2>& k, const Vec3& o, const Vec3& n,
                    double scale) {
  return scale * (static_cast<double>(k[0]) * o + static_cast<double>(k[1]) * n.cross(o));
}

double position_edge(const OrientationField& f, const std::vector<Vec3>& q, double scale,
                     int a, int b) {
  if (a > b) std::swap(a, b);
  const Vec3 d = q[b] - q[a];
  const auto k = lattice_offset(d, f.dir[a], f.normal[a], scale);
  return (d - lattice_vector(k, f.dir[a], f.normal[a], scale)).squaredNorm();
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Vec3 transport(const Vec3& v, const Vec3& from, const Vec3& to) {
  const double c = from.dot(to);
  if (c > 1.0 - 1e-15) return v - to.dot(v) * to;
  if (c < -1.0 + 1e-9) {
    // Half turn: no unique minimal rotation, fall back to projection.
    const Vec3 p = v - to.dot(v) * to;
    return p.squaredNorm() > 0 ? Vec3(p.normalized() * v.norm()) : p;
  }
  const Vec3 axis = from.cross(to);
  // Rodrigues with sin = |axis|, cos = c.
  const Vec3 r = v * c + axis.cross(v) + axis * (axis.dot(v) / (1.0 + c));
  return r - to.dot(r) * to;
}

Vec3 closest_rotation(const Vec3& oi, const Vec3& ni, const Vec3& oj, const Vec3& nj) {
  const Vec3 t = transport(oj, nj, ni);
  const Vec3 u = ni.cross(t);
  const double a = oi.dot(t);
  const double b = oi.dot(u);
  if (std::abs(a) >= std::abs(b)) return a >= 0 ? t : Vec3(-t);
  return b >= 0 ? u : Vec3(-u);
}

double rosy_angle(const Vec3& oi, const Vec3& ni, const Vec3& oj, const Vec3& nj) {
  const Vec3 r = closest_rotation(oi, ni, oj, nj);
  const double s = oi.cross(r).norm();
  return std::atan2(s, oi.dot(r));
}

double orientation_energy(const TriMesh& mesh, const OrientationField& field) {
  double e = 0.0;
  for (auto [a, b] : unique_edges(mesh)) e += orientation_edge(field, a, b);
  return e;
}

namespace {

// One level of the coarsening hierarchy. Level 0 is the input mesh.
struct Level {
  std::vector<Vec3> pos;
  std::vector<Vec3> normal;
  std::vector<double> area;
  std::vector<std::vector<int>> nb;
  std::vector<int> parent;  // index into the next coarser level
};

Level finest_level(const TriMesh& mesh, const std::vector<Vec3>& normals) {
  Level l;
  l.pos = mesh.vertices;
  l.normal = normals;
  l.area.assign(mesh.num_vertices(), 0.0);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const double a = mesh.face_area(f) / 3.0;
    for (int v : mesh.faces[f]) l.area[v] += a;
  }
  for (double& a : l.area) a = std::max(a, 1e-300);
  l.nb = neighbor_lists(mesh);
  return l;
}

// Greedy matching of neighbours in index order.
bool coarsen(Level& fine, Level& coarse) {
  const std::size_t n = fine.pos.size();
  fine.parent.assign(n, -1);
  int next = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (fine.parent[v] >= 0) continue;
    fine.parent[v] = next;
    int best = -1;
    double best_d = 0;
    for (int w : fine.nb[v]) {
      if (fine.parent[w] >= 0) continue;
      const double d = (fine.pos[w] - fine.pos[v]).squaredNorm();
      if (best < 0 || d < best_d) {
        best = w;
        best_d = d;
      }
    }
    if (best >= 0) fine.parent[best] = next;
    ++next;
  }
  if (static_cast<std::size_t>(next) == n) return false;
  coarse = Level{};
  coarse.pos.assign(next, Vec3::Zero());
  coarse.normal.assign(next, Vec3::Zero());
  coarse.area.assign(next, 0.0);
  coarse.nb.resize(next);
  for (std::size_t v = 0; v < n; ++v) {
    const int p = fine.parent[v];
    coarse.pos[p] += fine.area[v] * fine.pos[v];
    coarse.normal[p] += fine.area[v] * fine.normal[v];
    coarse.area[p] += fine.area[v];
  }
  for (int p = 0; p < next; ++p) coarse.pos[p] /= coarse.area[p];
  for (std::size_t v = 0; v < n; ++v) {
    const int p = fine.parent[v];
    if (coarse.normal[p].squaredNorm() < kDegenerateNormal) coarse.normal[p] = fine.normal[v];
    for (int w : fine.nb[v]) {
      const int q = fine.parent[w];
      if (q != p) coarse.nb[p].push_back(q);
    }
  }
  for (int p = 0; p < next; ++p) {
    coarse.normal[p].normalize();
    auto& list = coarse.nb[p];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return true;
}

std::vector<Level> build_hierarchy(const TriMesh& mesh, const std::vector<Vec3>& normals) {
  std::vector<Level> levels;
  levels.push_back(finest_level(mesh, normals));
  for (;;) {
    Level coarse;
    if (levels.back().pos.size() <= 1 || !coarsen(levels.back(), coarse)) break;
    levels.push_back(std::move(coarse));
  }
  return levels;
}

double level_orientation_energy(const Level& l, const std::vector<Vec3>& dir) {
  double e = 0.0;
  for (std::size_t i = 0; i < l.nb.size(); ++i) {
    for (int j : l.nb[i]) {
      if (j > static_cast<int>(i)) {
        e += std::max(0.0, 1.0 - best_alignment(dir[i], l.normal[i], dir[j], l.normal[j]));
      }
    }
  }
  return e;
}

double orientation_pair(const Level& l, const std::vector<Vec3>& dir, int a, int b) {
  if (a > b) std::swap(a, b);
  return std::max(0.0, 1.0 - best_alignment(dir[a], l.normal[a], dir[b], l.normal[b]));
}

void orientation_sweeps(const Level& l, std::vector<Vec3>& dir, const std::vector<char>& frozen,
                        int iterations, FieldReport* report) {
  for (int sweep = 0; sweep < iterations; ++sweep) {
    for (std::size_t i = 0; i < dir.size(); ++i) {
      if (frozen[i] || l.nb[i].empty()) continue;
      const Vec3& ni = l.normal[i];
      const Vec3 oi = dir[i];
      Vec3 sum = Vec3::Zero();
      for (int j : l.nb[i]) sum += closest_rotation(oi, ni, dir[j], l.normal[j]);
      sum -= ni.dot(sum) * ni;
      if (sum.squaredNorm() < 1e-24) continue;
      const int vi = static_cast<int>(i);
      double before = 0.0;
      for (int j : l.nb[i]) before += orientation_pair(l, dir, vi, j);
      dir[i] = sum.normalized();
      double after = 0.0;
      for (int j : l.nb[i]) after += orientation_pair(l, dir, vi, j);
      if (after > before) {
        dir[i] = oi;
        if (report) ++report->rejected_updates;
      }
    }
    if (report) report->energy.push_back(level_orientation_energy(l, dir));
  }
}

// Coarse direction: aligned sum of the children.
std::vector<Vec3> restrict_orientation(const Level& fine, const Level& coarse,
                                       const std::vector<Vec3>& dir) {
  const std::size_t nc = coarse.pos.size();
  std::vector<Vec3> out(nc, Vec3::Zero());
  std::vector<char> seeded(nc, 0);
  for (std::size_t v = 0; v < fine.pos.size(); ++v) {
    const int p = fine.parent[v];
    const Vec3& np = coarse.normal[p];
    if (!seeded[p]) {
      out[p] = transport(dir[v], fine.normal[v], np);
      seeded[p] = 1;
    } else {
      const Vec3 ref = out[p].normalized();
      out[p] += fine.area[v] * closest_rotation(ref, np, dir[v], fine.normal[v]);
    }
  }
  for (std::size_t p = 0; p < nc; ++p) {
    Vec3 t = out[p] - coarse.normal[p].dot(out[p]) * coarse.normal[p];
    out[p] = t.squaredNorm() > 1e-24 ? t.normalized() : any_tangent(coarse.normal[p]);
  }
  return out;
}

void prolong_orientation(const Level& fine, const Level& coarse,
                         const std::vector<Vec3>& coarse_dir, std::vector<Vec3>& dir,
                         const std::vector<char>& frozen) {
  for (std::size_t v = 0; v < fine.pos.size(); ++v) {
    if (frozen[v]) continue;
    const int p = fine.parent[v];
    Vec3 t = transport(coarse_dir[p], coarse.normal[p], fine.normal[v]);
    dir[v] = t.squaredNorm() > 1e-24 ? t.normalized() : any_tangent(fine.normal[v]);
  }
}

}  // namespace

OrientationField optimize_orientation_field(const TriMesh& mesh,
                                            const OrientationOptions& options,
                                            FieldReport* report) {
  if (options.iterations < 0) throw InvalidArgument("iterations must be non-negative");
  mesh.validate();
  const std::size_t n = mesh.num_vertices();
  OrientationField field;
  field.normal = mesh.vertex_normals();
  field.dir.resize(n);
  std::vector<char> frozen(n, 0);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  FieldReport local;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3& nrm = field.normal[i];
    if (nrm.squaredNorm() < kDegenerateNormal) {
      nrm = Vec3::UnitZ();
      frozen[i] = 1;
      local.frozen.push_back(static_cast<int>(i));
    }
    const Vec3 t = any_tangent(nrm);
    if (options.init == OrientationInit::kRandom && !frozen[i]) {
      const double phi = angle(rng);
      field.dir[i] = (std::cos(phi) * t + std::sin(phi) * nrm.cross(t)).normalized();
    } else {
      field.dir[i] = t;
    }
  }
  local.initial_energy = orientation_energy(mesh, field);

  std::vector<Level> levels = build_hierarchy(mesh, field.normal);
  local.levels = levels.size();
  if (options.multilevel && options.iterations > 0) {
    std::vector<std::vector<Vec3>> dirs{field.dir};
    for (std::size_t k = 1; k < levels.size(); ++k) {
      dirs.push_back(restrict_orientation(levels[k - 1], levels[k], dirs.back()));
    }
    for (std::size_t k = levels.size() - 1; k >= 1; --k) {
      orientation_sweeps(levels[k], dirs[k], std::vector<char>(dirs[k].size(), 0),
                         options.iterations, nullptr);
      prolong_orientation(levels[k - 1], levels[k], dirs[k], dirs[k - 1],
                          k == 1 ? frozen : std::vector<char>(dirs[k - 1].size(), 0));
    }
    field.dir = dirs[0];
  }
  local.energy.push_back(orientation_energy(mesh, field));
  orientation_sweeps(levels[0], field.dir, frozen, options.iterations, &local);
  if (report) *report = std::move(local);
  return field;
}

std::array<long, 2> lattice_offset(const Vec3& d, const Vec3& o, const Vec3& n,
                                   double scale) {
  const Vec3 b = n.cross(o);
  return {std::lround(d.dot(o) / scale), std::lround(d.dot(b) / scale)};
}

double position_energy(const TriMesh& mesh, const OrientationField& orient,
                       const PositionField& pos) {
  double e = 0.0;
  for (auto [a, b] : unique_edges(mesh)) {
    e += position_edge(orient, pos.anchor, pos.scale, a, b);
  }
  return e;
}

namespace {

double level_position_energy(const Level& l, const std::vector<Vec3>& dir,
                             const std::vector<Vec3>& q, double scale) {
  double e = 0.0;
  for (std::size_t i = 0; i < l.nb.size(); ++i) {
    for (int j : l.nb[i]) {
      if (j <= static_cast<int>(i)) continue;
      const Vec3 d = q[j] - q[i];
      const auto k = lattice_offset(d, dir[i], l.normal[i], scale);
      e += (d - lattice_vector(k, dir[i], l.normal[i], scale)).squaredNorm();
    }
  }
  return e;
}

double position_pair(const Level& l, const std::vector<Vec3>& dir, const std::vector<Vec3>& q,
                     double scale, int a, int b) {
  if (a > b) std::swap(a, b);
  const Vec3 d = q[b] - q[a];
  const auto k = lattice_offset(d, dir[a], l.normal[a], scale);
  return (d - lattice_vector(k, dir[a], l.normal[a], scale)).squaredNorm();
}

// Moves `q` onto the tangent plane of `p` and then to the lattice point
// nearest `p`.
Vec3 snap_anchor(const Vec3& q, const Vec3& p, const Vec3& o, const Vec3& n, double scale) {
  Vec3 c = q - n.dot(q - p) * n;
  return c + lattice_vector(lattice_offset(p - c, o, n, scale), o, n, scale);
}

void position_sweeps(const Level& l, const std::vector<Vec3>& dir, std::vector<Vec3>& q,
                     double scale, int iterations, FieldReport* report) {
  for (int sweep = 0; sweep < iterations; ++sweep) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (l.nb[i].empty()) continue;
      const Vec3& o = dir[i];
      const Vec3& nrm = l.normal[i];
      const Vec3 old = q[i];
      Vec3 sum = Vec3::Zero();
      for (int j : l.nb[i]) {
        sum += q[j] - lattice_vector(lattice_offset(q[j] - old, o, nrm, scale), o, nrm, scale);
      }
      const Vec3 cand =
          snap_anchor(sum / static_cast<double>(l.nb[i].size()), l.pos[i], o, nrm, scale);
      const int vi = static_cast<int>(i);
      double before = 0.0;
      for (int j : l.nb[i]) before += position_pair(l, dir, q, scale, vi, j);
      q[i] = cand;
      double after = 0.0;
      for (int j : l.nb[i]) after += position_pair(l, dir, q, scale, vi, j);
      if (after > before) {
        q[i] = old;
        if (report) ++report->rejected_updates;
      }
    }
    if (report) report->energy.push_back(level_position_energy(l, dir, q, scale));
  }
}

}  // namespace

PositionField optimize_position_field(const TriMesh& mesh, const OrientationField& orient,
                                      double scale, int iterations, FieldReport* report,
                                      bool multilevel) {
  if (!(scale > 0) || !std::isfinite(scale)) throw InvalidArgument("scale must be positive");
  if (iterations < 0) throw InvalidArgument("iterations must be non-negative");
  const std::size_t n = mesh.num_vertices();
  if (orient.dir.size() != n || orient.normal.size() != n) {
    throw InvalidArgument("orientation field does not match the mesh");
  }
  PositionField pos;
  pos.scale = scale;
  pos.anchor = mesh.vertices;

  FieldReport local;
  local.initial_energy = position_energy(mesh, orient, pos);
  std::vector<Level> levels = build_hierarchy(mesh, orient.normal);
  local.levels = levels.size();
  if (multilevel && iterations > 0 && levels.size() > 1) {
    std::vector<std::vector<Vec3>> dirs{orient.dir};
    for (std::size_t k = 1; k < levels.size(); ++k) {
      dirs.push_back(restrict_orientation(levels[k - 1], levels[k], dirs.back()));
    }
    std::vector<Vec3> q = levels.back().pos;
    for (std::size_t k = levels.size() - 1; k >= 1; --k) {
      position_sweeps(levels[k], dirs[k], q, scale, iterations, nullptr);
      const Level& fine = levels[k - 1];
      std::vector<Vec3> fq(fine.pos.size());
      for (std::size_t v = 0; v < fq.size(); ++v) {
        fq[v] = snap_anchor(q[fine.parent[v]], fine.pos[v], dirs[k - 1][v], fine.normal[v],
                            scale);
      }
      q = std::move(fq);
    }
    pos.anchor = std::move(q);
  }
  local.energy.push_back(position_energy(mesh, orient, pos));
  position_sweeps(levels[0], orient.dir, pos.anchor, scale, iterations, &local);
  if (report) *report = std::move(local);
  return pos;
}

std::size_t QuadDominantMesh::num_quads() const {
  return std::count_if(faces.begin(), faces.end(),
                       [](const auto& f) { return f.size() == 4; });
}

std::size_t QuadDominantMesh::num_triangles() const {
  return std::count_if(faces.begin(), faces.end(),
                       [](const auto& f) { return f.size() == 3; });
}

std::size_t QuadDominantMesh::num_interior_triangles() const {
  std::size_t count = 0;
  for (const auto& f : faces) {
    if (f.size() != 3) continue;
    if (std::none_of(f.begin(), f.end(), [&](int v) { return boundary[v] != 0; })) ++count;
  }
  return count;
}

std::string QuadReport::to_text() const {
  std::ostringstream out;
  out << "sites " << sites << "\n"
      << "links " << links << "\n"
      << "quads " << quads << "\n"
      << "triangles " << triangles << "\n"
      << "skipped_cycles " << skipped_cycles << "\n"
      << "inconsistent_links " << inconsistent_links << "\n"
      << "irregular " << irregular.size() << "\n";
  for (int v : irregular) out << "irregular_vertex " << v << "\n";
  return out.str();
}

QuadDominantMesh extract_quads(const TriMesh& mesh, const OrientationField& orient,
                               const PositionField& pos, QuadReport* report) {
  const std::size_t n = mesh.num_vertices();
  if (pos.anchor.size() != n || orient.dir.size() != n) {
    throw InvalidArgument("fields do not match the mesh");
  }
  if (!(pos.scale > 0)) throw InvalidArgument("scale must be positive");
  const double rho = pos.scale;
  const auto& q = pos.anchor;
  const auto edges = unique_edges(mesh);
  QuadReport rep;

  UnionFind uf(n);
  for (auto [a, b] : edges) {
    if ((q[a] - q[b]).norm() < 0.3 * rho) uf.unite(a, b);
  }
  std::vector<int> site_of(n, -1);
  std::vector<int> site_root;
  for (std::size_t i = 0; i < n; ++i) {
    const int r = uf.find(static_cast<int>(i));
    if (site_of[r] < 0) {
      site_of[r] = static_cast<int>(site_root.size());
      site_root.push_back(r);
    }
    site_of[i] = site_of[r];
  }
  const std::size_t ns = site_root.size();
  rep.sites = ns;
  std::vector<Vec3> site_pos(ns, Vec3::Zero());
  std::vector<Vec3> site_normal(ns, Vec3::Zero());
  std::vector<int> site_count(ns, 0);
  for (std::size_t i = 0; i < n; ++i) {
    site_pos[site_of[i]] += q[i];
    site_normal[site_of[i]] += orient.normal[i];
    ++site_count[site_of[i]];
  }
  for (std::size_t s = 0; s < ns; ++s) {
    site_pos[s] /= site_count[s];
    if (site_normal[s].squaredNorm() > 0) site_normal[s].normalize();
  }
  std::vector<char> site_boundary(ns, 0);
  {
    EdgeTable table(mesh);
    for (const Edge& e : table.edges()) {
      if (e.faces.size() == 1) {
        site_boundary[site_of[e.v0]] = 1;
        site_boundary[site_of[e.v1]] = 1;
      }
    }
  }

  std::set<std::pair<int, int>> links;
  for (auto [a, b] : edges) {
    const int sa = site_of[a], sb = site_of[b];
    if (sa == sb) continue;
    const Vec3 d = q[b] - q[a];
    const auto k = lattice_offset(d, orient.dir[a], orient.normal[a], rho);
    const double residual =
        (d - lattice_vector(k, orient.dir[a], orient.normal[a], rho)).norm();
    if (residual > 0.3 * rho || (k[0] == 0 && k[1] == 0)) {
      ++rep.inconsistent_links;
      continue;
    }
    if (std::abs(k[0]) + std::abs(k[1]) != 1) continue;
    links.emplace(std::min(sa, sb), std::max(sa, sb));
  }
  rep.links = links.size();

  // Neighbours of every site in counterclockwise order about the site normal.
  std::vector<std::vector<int>> ring(ns);
  for (auto [a, b] : links) {
    ring[a].push_back(b);
    ring[b].push_back(a);
  }
  for (std::size_t s = 0; s < ns; ++s) {
    const Vec3& nrm = site_normal[s];
    const Vec3 u = any_tangent(nrm.squaredNorm() > 0 ? nrm : Vec3::UnitZ());
    const Vec3 w = nrm.cross(u);
    std::vector<std::pair<double, int>> keyed;
    for (int t : ring[s]) {
      const Vec3 d = site_pos[t] - site_pos[s];
      keyed.emplace_back(std::atan2(d.dot(w), d.dot(u)), t);
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t k = 0; k < keyed.size(); ++k) ring[s][k] = keyed[k].second;
  }
  auto position_in_ring = [&](int s, int t) {
    return static_cast<int>(std::find(ring[s].begin(), ring[s].end(), t) - ring[s].begin());
  };

  // Trace the face to the left of every directed link.
  std::set<std::pair<int, int>> visited;
  std::vector<std::vector<int>> cycles;
  for (std::size_t s = 0; s < ns; ++s) {
    for (int t : ring[s]) {
      int u = static_cast<int>(s), v = t;
      if (visited.count({u, v})) continue;
      std::vector<int> cycle;
      while (!visited.count({u, v})) {
        visited.emplace(u, v);
        cycle.push_back(u);
        const auto& r = ring[v];
        const int k = position_in_ring(v, u);
        const int w = r[(k + static_cast<int>(r.size()) - 1) % r.size()];
        u = v;
        v = w;
      }
      // A walk that revisits a site (a dangling link) splits into simple loops.
      std::vector<int> stack;
      for (int x : cycle) {
        const auto hit = std::find(stack.begin(), stack.end(), x);
        if (hit != stack.end()) {
          cycles.emplace_back(hit, stack.end());
          stack.erase(hit + 1, stack.end());
        } else {
          stack.push_back(x);
        }
      }
      cycles.push_back(std::move(stack));
    }
  }

  QuadDominantMesh out;
  std::vector<std::vector<int>> faces;
  for (const auto& c : cycles) {
    if (c.size() < 3) {
      ++rep.skipped_cycles;
      continue;
    }
    Vec3 centroid = Vec3::Zero();
    Vec3 nrm = Vec3::Zero();
    for (int s : c) {
      centroid += site_pos[s];
      nrm += site_normal[s];
    }
    centroid /= static_cast<double>(c.size());
    Vec3 area = Vec3::Zero();
    for (std::size_t k = 0; k < c.size(); ++k) {
      area += (site_pos[c[k]] - centroid).cross(site_pos[c[(k + 1) % c.size()]] - centroid);
    }
    if (area.dot(nrm) <= 0) {
      ++rep.skipped_cycles;
      continue;
    }
    if (c.size() <= 4) {
      faces.push_back(c);
    } else {
      for (std::size_t k = 1; k + 1 < c.size(); ++k) faces.push_back({c[0], c[k], c[k + 1]});
    }
  }

  std::vector<int> remap(ns, -1);
  for (auto& f : faces) {
    for (int& s : f) {
      if (remap[s] < 0) {
        remap[s] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(site_pos[s]);
        out.boundary.push_back(site_boundary[s]);
      }
      s = remap[s];
    }
  }
  out.faces = std::move(faces);
  rep.quads = out.num_quads();
  rep.triangles = out.num_triangles();
  for (std::size_t s = 0; s < ns; ++s) {
    if (remap[s] >= 0 && !site_boundary[s] && ring[s].size() != 4) {
      rep.irregular.push_back(remap[s]);
    }
  }
  std::sort(rep.irregular.begin(), rep.irregular.end());
  if (report) *report = std::move(rep);
  return out;
}

TriMesh triangulate(const QuadDominantMesh& mesh) {
  TriMesh out;
  out.vertices = mesh.vertices;
  for (const auto& f : mesh.faces) {
    for (std::size_t k = 1; k + 1 < f.size(); ++k) out.faces.push_back({f[0], f[k], f[k + 1]});
  }
  return out;
}

}  // namespace texmesh

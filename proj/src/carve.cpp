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

#include "texmesh/carve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mc_tables.hpp"

namespace texmesh {

namespace {

// Lattice edge id: lower corner index * 3 + axis.
std::uint64_t lattice_edge_key(const GridField& grid, int i, int j, int k, int axis) {
  return static_cast<std::uint64_t>(grid.index(i, j, k)) * 3u +
         static_cast<std::uint64_t>(axis);
}

}  // namespace

TriMesh marching_cubes(const GridField& grid, double iso) {
  if (!(iso > 0.0 && iso < 1.0)) throw InvalidArgument("iso level must be in (0,1)");
  const auto& dims = grid.dims();
  TriMesh mesh;
  std::unordered_map<std::uint64_t, int> edge_vertex;
  edge_vertex.reserve(1024);

  auto vertex_on_edge = [&](int ci, int cj, int ck, int e) {
    const int* ca = detail::kCornerOffset[detail::kEdgeCorners[e][0]];
    const int* cb = detail::kCornerOffset[detail::kEdgeCorners[e][1]];
    int a[3] = {ci + ca[0], cj + ca[1], ck + ca[2]};
    int b[3] = {ci + cb[0], cj + cb[1], ck + cb[2]};
    // Orient from the lower lattice corner so shared edges produce identical
    // positions in every cell.
    if (a[0] + a[1] + a[2] > b[0] + b[1] + b[2]) std::swap(a, b);
    const int axis = b[0] != a[0] ? 0 : (b[1] != a[1] ? 1 : 2);
    const std::uint64_t key = lattice_edge_key(grid, a[0], a[1], a[2], axis);
    auto [it, inserted] = edge_vertex.try_emplace(key, 0);
    if (inserted) {
      const double va = grid.at(a[0], a[1], a[2]);
      const double vb = grid.at(b[0], b[1], b[2]);
      const double t = std::clamp((iso - va) / (vb - va), 0.0, 1.0);
      const Vec3 pa = grid.point(a[0], a[1], a[2]);
      const Vec3 pb = grid.point(b[0], b[1], b[2]);
      it->second = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(pa + t * (pb - pa));
    }
    return it->second;
  };

  for (int k = 0; k + 1 < dims[2]; ++k) {
    for (int j = 0; j + 1 < dims[1]; ++j) {
      for (int i = 0; i + 1 < dims[0]; ++i) {
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          const int* o = detail::kCornerOffset[c];
          if (grid.at(i + o[0], j + o[1], k + o[2]) < iso) cube |= 1 << c;
        }
        if (cube == 0 || cube == 255) continue;
        const int* tri = detail::kTriTable[cube];
        for (int t = 0; tri[t] >= 0; t += 3) {
          const int v0 = vertex_on_edge(i, j, k, tri[t]);
          const int v1 = vertex_on_edge(i, j, k, tri[t + 1]);
          const int v2 = vertex_on_edge(i, j, k, tri[t + 2]);
          if (v0 == v1 || v1 == v2 || v0 == v2) continue;
          // Table winding is counterclockwise seen from the low side.
          mesh.faces.push_back({v0, v1, v2});
        }
      }
    }
  }
  return mesh;
}

TriMesh merge_duplicate_vertices(const TriMesh& mesh, double eps) {
  if (eps < 0) throw InvalidArgument("merge eps must be non-negative");
  const std::size_t n = mesh.vertices.size();
  std::vector<int> rep(n, -1);
  std::vector<int> new_index(n, -1);
  TriMesh out;

  struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& k) const {
      std::uint64_t h = 1469598103934665603ull;
      for (auto v : k) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 1099511628211ull;
      }
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<int>, KeyHash> buckets;
  buckets.reserve(n);
  auto cell_of = [&](const Vec3& p) {
    std::array<std::int64_t, 3> c{};
    for (int a = 0; a < 3; ++a) {
      c[a] = eps > 0 ? static_cast<std::int64_t>(std::floor(p[a] / eps)) : 0;
    }
    return c;
  };

  for (std::size_t v = 0; v < n; ++v) {
    const Vec3& p = mesh.vertices[v];
    const auto cell = cell_of(p);
    int found = -1;
    if (eps > 0) {
      for (int dz = -1; dz <= 1 && found < 0; ++dz) {
        for (int dy = -1; dy <= 1 && found < 0; ++dy) {
          for (int dx = -1; dx <= 1 && found < 0; ++dx) {
            auto it = buckets.find({cell[0] + dx, cell[1] + dy, cell[2] + dz});
            if (it == buckets.end()) continue;
            for (int r : it->second) {
              if ((mesh.vertices[r] - p).norm() <= eps) {
                found = r;
                break;
              }
            }
          }
        }
      }
    } else {
      auto it = buckets.find(cell);
      if (it != buckets.end()) {
        for (int r : it->second) {
          if (mesh.vertices[r] == p) {
            found = r;
            break;
          }
        }
      }
    }
    if (found >= 0) {
      rep[v] = found;
      new_index[v] = new_index[found];
    } else {
      rep[v] = static_cast<int>(v);
      new_index[v] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(p);
      buckets[cell].push_back(static_cast<int>(v));
    }
  }
  out.faces.reserve(mesh.faces.size());
  for (const Face& f : mesh.faces) {
    const Face g{new_index[f[0]], new_index[f[1]], new_index[f[2]]};
    if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) continue;
    out.faces.push_back(g);
  }
  return out;
}

TriMesh remove_zero_area_faces(const TriMesh& mesh, double area_eps) {
  TriMesh out;
  out.vertices = mesh.vertices;
  out.faces.reserve(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (mesh.face_area(f) >= area_eps) out.faces.push_back(mesh.faces[f]);
  }
  return out;
}

TriMesh remove_unreferenced_vertices(const TriMesh& mesh) {
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (const Face& f : mesh.faces) {
    for (int v : f) remap[v] = 0;
  }
  TriMesh out;
  for (std::size_t v = 0; v < remap.size(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(mesh.vertices[v]);
  }
  out.faces.reserve(mesh.faces.size());
  for (const Face& f : mesh.faces) out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  return out;
}

namespace {

std::vector<int> face_components(const TriMesh& mesh, int* count) {
  std::vector<int> parent(mesh.faces.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const EdgeTable edges(mesh);
  for (const Edge& e : edges.edges()) {
    for (std::size_t i = 1; i < e.faces.size(); ++i) {
      const int a = root(e.faces[0]);
      const int b = root(e.faces[i]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<int> label(mesh.faces.size(), -1);
  std::vector<int> root_label(mesh.faces.size(), -1);
  int next = 0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const int r = root(static_cast<int>(f));
    if (root_label[r] < 0) root_label[r] = next++;
    label[f] = root_label[r];
  }
  *count = next;
  return label;
}

}  // namespace

TriMesh remove_small_components(const TriMesh& mesh, double min_face_fraction) {
  int count = 0;
  const std::vector<int> label = face_components(mesh, &count);
  std::vector<std::size_t> size(count, 0);
  for (int l : label) ++size[l];
  int largest = -1;
  for (int c = 0; c < count; ++c) {
    if (largest < 0 || size[c] > size[largest]) largest = c;
  }
  const double threshold = min_face_fraction * static_cast<double>(mesh.faces.size());
  TriMesh out;
  out.vertices = mesh.vertices;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const int c = label[f];
    if (c == largest || static_cast<double>(size[c]) >= threshold) {
      out.faces.push_back(mesh.faces[f]);
    }
  }
  return out;
}

TriMesh repair_nonmanifold(const TriMesh& mesh, RepairReport* report) {
  const EdgeTable table(mesh);
  const auto& edges = table.edges();
  const std::vector<double> area = mesh.face_areas();

  std::vector<int> live_count(edges.size());
  std::vector<std::array<int, 3>> face_edges(mesh.faces.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    live_count[e] = static_cast<int>(edges[e].faces.size());
  }
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k) face_edges[f][k] = table.find(t[k], t[(k + 1) % 3]);
  }

  std::vector<char> removed(mesh.faces.size(), 0);
  auto is_candidate = [&](int f) {
    for (int e : face_edges[f]) {
      if (live_count[e] >= 3) return true;
    }
    return false;
  };
  // Ordered by (area, index): begin() is the next face to remove.
  std::set<std::pair<double, int>> queue;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (live_count[e] < 3) continue;
    for (int f : edges[e].faces) queue.insert({area[f], f});
  }
  RepairReport local;
  while (!queue.empty()) {
    const int f = queue.begin()->second;
    queue.erase(queue.begin());
    removed[f] = 1;
    local.removal_order.push_back(f);
    for (int e : face_edges[f]) {
      --live_count[e];
      if (live_count[e] == 2) {
        // The edge just became manifold; its faces may leave the queue.
        for (int g : edges[e].faces) {
          if (!removed[g] && !is_candidate(g)) queue.erase({area[g], g});
        }
      }
    }
  }
  local.removed_faces = local.removal_order.size();

  TriMesh out;
  out.vertices = mesh.vertices;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (!removed[f]) out.faces.push_back(mesh.faces[f]);
  }
  if (report) *report = std::move(local);
  return out;
}

std::string CleanReport::to_key_values(const std::string& prefix) const {
  std::ostringstream os;
  os.precision(9);
  os << prefix << "merge_eps=" << merge_eps << "\n"
     << prefix << "area_eps=" << area_eps << "\n"
     << prefix << "min_component_fraction=" << min_component_fraction << "\n"
     << prefix << "merged_vertices=" << merged_vertices << "\n"
     << prefix << "zero_area_faces=" << zero_area_faces << "\n"
     << prefix << "nonmanifold_faces=" << nonmanifold_faces << "\n"
     << prefix << "small_component_faces=" << small_component_faces << "\n"
     << prefix << "unreferenced_vertices=" << unreferenced_vertices << "\n"
     << prefix << "pinched_vertices=" << pinched_vertices << "\n";
  return os.str();
}

TriMesh clean(const TriMesh& mesh, const CleanParams& params, CleanReport* report) {
  const double diag = bounding_box(mesh).diagonal();
  CleanReport r;
  r.merge_eps = params.merge_eps.value_or(1e-6 * diag);
  r.area_eps = params.area_eps.value_or(1e-12 * diag * diag);
  r.min_component_fraction = params.min_component_fraction;

  TriMesh m = merge_duplicate_vertices(mesh, r.merge_eps);
  r.merged_vertices = mesh.vertices.size() - m.vertices.size();
  std::size_t before = m.faces.size();
  m = remove_zero_area_faces(m, r.area_eps);
  r.zero_area_faces = before - m.faces.size();
  RepairReport repair;
  m = repair_nonmanifold(m, &repair);
  r.nonmanifold_faces = repair.removed_faces;
  before = m.faces.size();
  m = remove_small_components(m, r.min_component_fraction);
  r.small_component_faces = before - m.faces.size();
  before = m.vertices.size();
  m = remove_unreferenced_vertices(m);
  r.unreferenced_vertices = before - m.vertices.size();
  r.pinched_vertices = count_pinched_vertices(m);
  if (report) *report = r;
  return m;
}

}  // namespace texmesh

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

#include "texmesh/occlude.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>
#include <random>

namespace texmesh {

namespace {

using Feature = Eigen::Matrix<double, 6, 1>;

// Uniform double in [0, 1) with the same sequence on every platform.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Index drawn with probability proportional to `w` (all w >= 0, sum > 0).
std::size_t sample(const std::vector<double>& w, std::mt19937_64& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  const double r = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0) continue;
    acc += w[i];
    last = i;
    if (r < acc) return i;
  }
  return last;
}

int nearest_center(const Feature& x, const std::vector<Feature>& centers) {
  int best = 0;
  double best_d = (x - centers[0]).squaredNorm();
  for (std::size_t c = 1; c < centers.size(); ++c) {
    const double d = (x - centers[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

Vec3 barycentric_of(const TriMesh& mesh, int f, const Vec3& p) {
  const Vec3& a = mesh.vertices[mesh.faces[f][0]];
  const Vec3 v0 = mesh.vertices[mesh.faces[f][1]] - a;
  const Vec3 v1 = mesh.vertices[mesh.faces[f][2]] - a;
  const Vec3 v2 = p - a;
  const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  const double d20 = v2.dot(v0), d21 = v2.dot(v1);
  const double den = d00 * d11 - d01 * d01;
  if (!(std::abs(den) > 0)) return Vec3(1.0 / 3, 1.0 / 3, 1.0 / 3);
  double u = (d11 * d20 - d01 * d21) / den;
  double v = (d00 * d21 - d01 * d20) / den;
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  if (u + v > 1.0) {
    const double s = u + v;
    u /= s;
    v /= s;
  }
  return Vec3(1.0 - u - v, u, v);
}

// Colour of the textured texel of face f closest to barycentric w, if any.
bool atlas_color(const TextureAtlas& atlas, int f, const Vec3& w, Rgba& out) {
  const AtlasBlock& b = atlas.blocks[f];
  const double X = w[1] * b.size, Y = w[2] * b.size;
  const int i = std::clamp(static_cast<int>(std::floor(X)), 0, b.size - 1);
  const int j = std::clamp(static_cast<int>(std::floor(Y)), 0, b.size - 1);
  if (i + j + 1 <= b.size && atlas.state[atlas.index(b.x + i, b.y + j)] == TexelState::kTextured) {
    out = atlas.image.at(b.x + i, b.y + j);
    return true;
  }
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int jj = 0; jj < b.size; ++jj) {
    for (int ii = 0; ii + jj + 1 <= b.size; ++ii) {
      if (atlas.state[atlas.index(b.x + ii, b.y + jj)] != TexelState::kTextured) continue;
      const double d = (ii + 0.5 - X) * (ii + 0.5 - X) + (jj + 0.5 - Y) * (jj + 0.5 - Y);
      if (d < best) {
        best = d;
        out = atlas.image.at(b.x + ii, b.y + jj);
        found = true;
      }
    }
  }
  return found;
}

}  // namespace

void InpaintParams::validate() const {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  if (!(position_weight >= 0)) throw InvalidArgument("position weight must be non-negative");
  if (tile_resolution < 16) throw InvalidArgument("tile resolution must be at least 16");
  if (max_rounds < 1) throw InvalidArgument("max_rounds must be positive");
  if (!(coverage_threshold > 0 && coverage_threshold <= 1)) {
    throw InvalidArgument("coverage threshold must be in (0,1]");
  }
}

std::vector<OcclusionCluster> cluster_occluded(const TriMesh& mesh, const std::vector<int>& faces,
                                               const InpaintParams& params,
                                               ClusterReport* report) {
  params.validate();
  if (faces.empty()) throw InvalidArgument("no faces to cluster");
  for (int f : faces) {
    if (f < 0 || static_cast<std::size_t>(f) >= mesh.num_faces()) {
      throw InvalidArgument("face index out of range");
    }
  }
  const std::size_t n = faces.size();
  const double diag = std::max(bounding_box(mesh).diagonal(), 1e-300);
  std::vector<Feature> x(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int f = faces[i];
    x[i] << mesh.face_normal(f), params.position_weight * mesh.face_centroid(f) / diag;
    w[i] = mesh.face_area(f);
  }
  if (std::all_of(w.begin(), w.end(), [](double a) { return a <= 0; })) w.assign(n, 1.0);
  for (double& a : w) a = std::max(a, 1e-300);

  ClusterReport rep;
  rep.requested_k = params.k;
  std::vector<Feature> distinct = x;
  std::sort(distinct.begin(), distinct.end(), [](const Feature& a, const Feature& b) {
    return std::lexicographical_compare(a.data(), a.data() + 6, b.data(), b.data() + 6);
  });
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const int k = std::min<int>(params.k, static_cast<int>(distinct.size()));
  rep.used_k = k;

  // k-means++ seeding.
  std::mt19937_64 rng(params.seed);
  std::vector<Feature> centers{x[sample(w, rng)]};
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Feature& c : centers) best = std::min(best, (x[i] - c).squaredNorm());
      d2[i] = w[i] * best;
    }
    centers.push_back(x[sample(d2, rng)]);
  }

  std::vector<int> assign(n, -1);
  for (int round = 0; round < params.max_rounds; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest_center(x[i], centers);
      changed |= c != assign[i];
      assign[i] = c;
    }
    bool reseeded = false;
    for (;;) {
      std::vector<Feature> sum(k, Feature::Zero());
      std::vector<double> mass(k, 0.0);
      std::vector<int> size(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        sum[assign[i]] += w[i] * x[i];
        mass[assign[i]] += w[i];
        ++size[assign[i]];
      }
      for (int c = 0; c < k; ++c) {
        if (size[c] > 0) centers[c] = sum[c] / mass[c];
      }
      const auto empty = std::find(size.begin(), size.end(), 0);
      if (empty == size.end()) break;
      // Farthest face from its centre moves to the empty cluster.
      std::size_t far = 0;
      double far_d = -1;
      for (std::size_t i = 0; i < n; ++i) {
        if (size[assign[i]] < 2) continue;
        const double d = (x[i] - centers[assign[i]]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      const int c = static_cast<int>(empty - size.begin());
      assign[far] = c;
      centers[c] = x[far];
      reseeded = true;
      ++rep.reseeded;
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += w[i] * (x[i] - centers[assign[i]]).squaredNorm();
    rep.inertia.push_back(inertia);
    rep.rounds = round + 1;
    if (!changed && !reseeded) {
      rep.converged = true;
      break;
    }
  }

  std::vector<OcclusionCluster> clusters(k);
  std::vector<Vec3> normal_sum(k, Vec3::Zero());
  std::vector<double> mass(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = assign[i];
    const int f = faces[i];
    clusters[c].faces.push_back(f);
    clusters[c].centroid += w[i] * mesh.face_centroid(f);
    normal_sum[c] += w[i] * mesh.face_normal(f);
    mass[c] += w[i];
  }
  for (int c = 0; c < k; ++c) {
    OcclusionCluster& cl = clusters[c];
    cl.centroid /= mass[c];
    if (normal_sum[c].norm() < 1e-6 * mass[c]) {
      cl.degenerate_normal = true;
    } else {
      cl.mean_normal = normal_sum[c].normalized();
    }
    cl.camera = cluster_viewpoint(mesh, cl, params.tile_resolution);
  }
  if (report) *report = std::move(rep);
  return clusters;
}

Camera cluster_viewpoint(const TriMesh& mesh, const OcclusionCluster& cluster, int resolution) {
  Vec3 outward = cluster.mean_normal;
  if (cluster.degenerate_normal) {
    Vec3 mesh_centroid = Vec3::Zero();
    for (const Vec3& v : mesh.vertices) mesh_centroid += v;
    if (!mesh.vertices.empty()) mesh_centroid /= static_cast<double>(mesh.vertices.size());
    outward = cluster.centroid - mesh_centroid;
    if (outward.norm() < 1e-12) outward = Vec3::UnitZ();
  }
  Camera cam = camera_for_direction(mesh, -outward, resolution, resolution);
  const Vec3 d = cam.direction();
  const BoundingBox box = bounding_box(mesh);
  const double radius = 0.5 * box.diagonal();
  const Vec3 o = cluster.centroid - box.center();
  // Eye on the bounding sphere: |o - t d| = radius, t > 0.
  const double od = o.dot(d);
  const double t = od + std::sqrt(std::max(0.0, od * od - o.squaredNorm() + radius * radius));
  cam.target = cluster.centroid;
  cam.distance = std::max(t, 1e-3 * box.diagonal() + 1e-12);
  double reach = 0.0;
  const Vec3 r = cam.right(), u = cam.up();
  for (int f : cluster.faces) {
    for (int v : mesh.faces[f]) {
      const Vec3 rel = mesh.vertices[v] - cluster.centroid;
      reach = std::max({reach, std::abs(rel.dot(r)), std::abs(rel.dot(u))});
    }
  }
  cam.ortho_scale = reach > 0 ? 1.2 * 2.0 * reach : 1e-3 * box.diagonal() + 1e-12;
  cam.validate();
  return cam;
}

std::size_t OcclusionCanvas::count(CanvasPixel k) const {
  return std::count(kind.begin(), kind.end(), k);
}

OcclusionCanvas build_canvas(const TriMesh& mesh, const TextureAtlas& atlas,
                             const std::vector<OcclusionCluster>& clusters,
                             const std::vector<int>& untextured, const InpaintParams& params) {
  params.validate();
  if (clusters.empty()) throw InvalidArgument("no clusters");
  if (atlas.blocks.size() != mesh.num_faces()) throw InvalidArgument("atlas does not match mesh");
  std::vector<char> masked(mesh.num_faces(), 0);
  for (int f : untextured) masked.at(f) = 1;

  OcclusionCanvas cv;
  const int k = static_cast<int>(clusters.size());
  cv.tile_size = params.tile_resolution;
  cv.columns = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
  cv.rows = (k + cv.columns - 1) / cv.columns;
  const std::size_t total = static_cast<std::size_t>(cv.width()) * cv.height();
  cv.image = Image(cv.width(), cv.height(), {0, 0, 0, 0});
  cv.kind.assign(total, CanvasPixel::kBackground);
  cv.face.assign(total, -1);
  cv.bary.assign(total, Vec3::Zero());
  cv.flagged.assign(total, 0);
  for (int t = 0; t < k; ++t) {
    Camera cam = clusters[t].camera;
    cam.width = cam.height = cv.tile_size;
    cv.cameras.push_back(cam);
    cv.tile_cluster.push_back(t);
    const RenderBuffers buf = rasterize(mesh, cam);
    const Vec3 d = cam.direction();
    parallel_for(static_cast<std::size_t>(cv.tile_size), [&](std::size_t y0, std::size_t y1) {
      for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
        for (int x = 0; x < cv.tile_size; ++x) {
          const std::size_t bi = buf.index(x, y);
          const int f = buf.face_id[bi];
          if (f < 0) continue;
          const std::size_t ci = cv.index(cv.tile_x(t) + x, cv.tile_y(t) + y);
          const Vec3 p = cam.unproject(x + 0.5, y + 0.5) + buf.depth[bi] * d;
          cv.face[ci] = f;
          cv.bary[ci] = barycentric_of(mesh, f, p);
          Rgba c{0, 0, 0, 255};
          if (!masked[f] && atlas_color(atlas, f, cv.bary[ci], c)) {
            c[3] = 255;
            cv.kind[ci] = CanvasPixel::kKnown;
          } else {
            c = {0, 0, 0, 255};
            cv.kind[ci] = CanvasPixel::kMask;
          }
          for (int ch = 0; ch < 4; ++ch) cv.image.pixels[4 * ci + ch] = c[ch];
        }
      }
    });
  }
  return cv;
}

Image HarmonicInpainter::inpaint(const Image& tile, const std::vector<std::uint8_t>& mask,
                                 std::vector<std::uint8_t>& flagged,
                                 InpaintTileReport* report) const {
  const int w = tile.width, h = tile.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (mask.size() != n) throw InvalidArgument("mask does not match the tile");
  flagged.assign(n, 0);
  Image out = tile;
  InpaintTileReport rep;
  auto known = [&](std::size_t i) { return !mask[i] && tile.pixels[4 * i + 3] > 0; };

  std::array<double, 3> mean{128, 128, 128};
  {
    std::array<double, 3> sum{0, 0, 0};
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!known(i)) continue;
      for (int ch = 0; ch < 3; ++ch) sum[ch] += tile.pixels[4 * i + ch];
      ++count;
    }
    if (count > 0) {
      for (int ch = 0; ch < 3; ++ch) mean[ch] = sum[ch] / count;
    }
  }

  std::vector<std::array<double, 3>> value(n, {0, 0, 0});
  for (std::size_t i = 0; i < n; ++i) {
    for (int ch = 0; ch < 3; ++ch) value[i][ch] = tile.pixels[4 * i + ch];
  }
  auto neighbours = [&](std::size_t i, std::array<std::size_t, 4>& nb) {
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    int m = 0;
    if (x > 0) nb[m++] = i - 1;
    if (x + 1 < w) nb[m++] = i + 1;
    if (y > 0) nb[m++] = i - w;
    if (y + 1 < h) nb[m++] = i + w;
    return m;
  };

  std::vector<int> region(n, -1);
  std::array<std::size_t, 4> nb{};
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!mask[seed] || region[seed] >= 0) continue;
    const int id = static_cast<int>(rep.regions++);
    std::vector<std::size_t> pixels{seed};
    region[seed] = id;
    bool has_boundary = false;
    for (std::size_t q = 0; q < pixels.size(); ++q) {
      const int m = neighbours(pixels[q], nb);
      for (int k = 0; k < m; ++k) {
        const std::size_t j = nb[k];
        if (mask[j] && region[j] < 0) {
          region[j] = id;
          pixels.push_back(j);
        } else if (known(j)) {
          has_boundary = true;
        }
      }
    }
    std::sort(pixels.begin(), pixels.end());
    if (!has_boundary) {
      ++rep.flagged_regions;
      for (std::size_t i : pixels) {
        value[i] = mean;
        flagged[i] = 1;
      }
      continue;
    }
    // Direct solve of the discrete Laplace system as the initial guess.
    std::unordered_map<std::size_t, int> slot;
    for (std::size_t q = 0; q < pixels.size(); ++q) slot[pixels[q]] = static_cast<int>(q);
    const int dim = static_cast<int>(pixels.size());
    std::vector<Eigen::Triplet<double>> entries;
    Eigen::MatrixX3d rhs = Eigen::MatrixX3d::Zero(dim, 3);
    for (int q = 0; q < dim; ++q) {
      const int m = neighbours(pixels[q], nb);
      int c = 0;
      for (int k = 0; k < m; ++k) {
        const std::size_t j = nb[k];
        if (mask[j]) {
          entries.emplace_back(q, slot.at(j), -1.0);
          ++c;
        } else if (known(j)) {
          for (int ch = 0; ch < 3; ++ch) rhs(q, ch) += value[j][ch];
          ++c;
        }
      }
      entries.emplace_back(q, q, static_cast<double>(c));
    }
    Eigen::SparseMatrix<double> lap(dim, dim);
    lap.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() == Eigen::Success) {
      const Eigen::MatrixX3d sol = solver.solve(rhs);
      for (int q = 0; q < dim; ++q) {
        for (int ch = 0; ch < 3; ++ch) value[pixels[q]][ch] = sol(q, ch);
      }
    }
    int sweep = 0;
    double change = 0.0;
    for (; sweep < max_sweeps_; ++sweep) {
      change = 0.0;
      for (std::size_t i : pixels) {
        std::array<double, 3> s{0, 0, 0};
        int c = 0;
        const int m = neighbours(i, nb);
        for (int k = 0; k < m; ++k) {
          const std::size_t j = nb[k];
          if (!mask[j] && !known(j)) continue;
          for (int ch = 0; ch < 3; ++ch) s[ch] += value[j][ch];
          ++c;
        }
        for (int ch = 0; ch < 3; ++ch) {
          const double v = s[ch] / c;
          change = std::max(change, std::abs(v - value[i][ch]));
          value[i][ch] = v;
        }
      }
      if (change < tolerance_) {
        ++sweep;
        break;
      }
    }
    rep.max_sweeps = std::max(rep.max_sweeps, sweep);
    rep.max_residual = std::max(rep.max_residual, change);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    for (int ch = 0; ch < 3; ++ch) {
      out.pixels[4 * i + ch] =
          static_cast<std::uint8_t>(std::clamp(std::lround(value[i][ch]), 0L, 255L));
    }
    out.pixels[4 * i + 3] = 255;
  }
  if (report) *report = rep;
  return out;
}

std::unique_ptr<Inpainter> make_inpainter(const std::string& name) {
  if (name == "harmonic") return std::make_unique<HarmonicInpainter>();
  throw InvalidArgument("unknown inpainter: " + name);
}

OcclusionCanvas inpaint_canvas(const OcclusionCanvas& canvas, const Inpainter& inpainter,
                               InpaintTileReport* report) {
  OcclusionCanvas out = canvas;
  const int tiles = static_cast<int>(canvas.cameras.size());
  const int ts = canvas.tile_size;
  std::vector<InpaintTileReport> reports(tiles);
  std::vector<std::exception_ptr> errors(tiles);
  parallel_for(static_cast<std::size_t>(tiles), [&](std::size_t t0, std::size_t t1) {
    for (int t = static_cast<int>(t0); t < static_cast<int>(t1); ++t) {
      try {
        Image tile(ts, ts, {0, 0, 0, 0});
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(ts) * ts, 0);
        for (int y = 0; y < ts; ++y) {
          for (int x = 0; x < ts; ++x) {
            const std::size_t ci = canvas.index(canvas.tile_x(t) + x, canvas.tile_y(t) + y);
            tile.set(x, y, canvas.image.at(canvas.tile_x(t) + x, canvas.tile_y(t) + y));
            mask[tile.index(x, y) / 4] = canvas.kind[ci] == CanvasPixel::kMask;
          }
        }
        std::vector<std::uint8_t> flagged;
        const Image filled = inpainter.inpaint(tile, mask, flagged, &reports[t]);
        if (filled.width != ts || filled.height != ts) {
          throw Error("inpainter returned a tile of the wrong size");
        }
        for (int y = 0; y < ts; ++y) {
          for (int x = 0; x < ts; ++x) {
            const std::size_t ti = static_cast<std::size_t>(y) * ts + x;
            if (!mask[ti]) continue;
            const int cx = canvas.tile_x(t) + x, cy = canvas.tile_y(t) + y;
            out.image.set(cx, cy, filled.at(x, y));
            if (ti < flagged.size()) out.flagged[canvas.index(cx, cy)] = flagged[ti];
          }
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (report) {
    *report = InpaintTileReport{};
    for (const auto& r : reports) {
      report->regions += r.regions;
      report->flagged_regions += r.flagged_regions;
      report->max_sweeps = std::max(report->max_sweeps, r.max_sweeps);
      report->max_residual = std::max(report->max_residual, r.max_residual);
    }
  }
  return out;
}

std::size_t reproject(const TriMesh& mesh, const OcclusionCanvas& canvas,
                      const std::vector<int>& faces, TextureAtlas& atlas) {
  if (atlas.blocks.size() != mesh.num_faces()) throw InvalidArgument("atlas does not match mesh");
  std::vector<char> selected(mesh.num_faces(), 0);
  for (int f : faces) selected.at(f) = 1;
  const int tiles = static_cast<int>(canvas.cameras.size());
  std::vector<std::vector<double>> conf;
  for (const Camera& cam : canvas.cameras) conf.push_back(confidence(mesh, cam));
  std::vector<std::size_t> written(atlas.height, 0);
  parallel_for(static_cast<std::size_t>(atlas.height), [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < atlas.width; ++x) {
        const std::size_t t = atlas.index(x, y);
        const int f = atlas.texel_face[t];
        if (f < 0 || !selected[f] || atlas.state[t] == TexelState::kTextured) continue;
        const Vec3 p = atlas.surface_point(mesh, x, y);
        int best = -1;
        double best_c = -1.0;
        std::size_t best_pixel = 0;
        for (int k = 0; k < tiles; ++k) {
          const Camera& cam = canvas.cameras[k];
          const Vec3 s = cam.project(p);
          const long px = std::lround(std::floor(s.x())), py = std::lround(std::floor(s.y()));
          if (px < 0 || py < 0 || px >= canvas.tile_size || py >= canvas.tile_size) continue;
          const std::size_t ci = canvas.index(canvas.tile_x(k) + static_cast<int>(px),
                                              canvas.tile_y(k) + static_cast<int>(py));
          if (canvas.face[ci] != f) continue;
          if (conf[k][f] > best_c) {
            best_c = conf[k][f];
            best = k;
            best_pixel = ci;
          }
        }
        if (best < 0) continue;
        for (int ch = 0; ch < 3; ++ch) {
          atlas.image.pixels[4 * t + ch] = canvas.image.pixels[4 * best_pixel + ch];
        }
        atlas.image.pixels[4 * t + 3] = 255;
        atlas.state[t] = TexelState::kTextured;
        ++written[y];
      }
    }
  });
  std::size_t total = 0;
  for (std::size_t c : written) total += c;
  return total;
}

TextureAtlas extrapolate(const TriMesh& mesh, const TextureAtlas& atlas,
                         ExtrapolateReport* report) {
  if (atlas.blocks.size() != mesh.num_faces()) throw InvalidArgument("atlas does not match mesh");
  const std::size_t nf = mesh.num_faces();
  TextureAtlas out = atlas;
  ExtrapolateReport rep;
  std::vector<std::array<double, 3>> color(nf, {0, 0, 0});
  std::vector<double> count(nf, 0.0);
  for (std::size_t t = 0; t < atlas.state.size(); ++t) {
    if (atlas.state[t] != TexelState::kTextured) continue;
    const int f = atlas.texel_face[t];
    for (int ch = 0; ch < 3; ++ch) color[f][ch] += atlas.image.pixels[4 * t + ch];
    count[f] += 1;
  }
  std::vector<char> done(nf, 0);
  for (std::size_t f = 0; f < nf; ++f) {
    if (count[f] > 0) {
      for (int ch = 0; ch < 3; ++ch) color[f][ch] /= count[f];
      done[f] = 1;
    }
  }

  std::vector<std::vector<int>> adjacent(nf);
  {
    const EdgeTable table(mesh);
    for (const Edge& e : table.edges()) {
      for (int a : e.faces) {
        for (int b : e.faces) {
          if (a != b) adjacent[a].push_back(b);
        }
      }
    }
  }
  const std::vector<double> area = mesh.face_areas();
  std::vector<int> frontier;
  for (std::size_t f = 0; f < nf; ++f) {
    if (done[f]) continue;
    for (int g : adjacent[f]) {
      if (done[g]) {
        frontier.push_back(static_cast<int>(f));
        break;
      }
    }
  }
  while (!frontier.empty()) {
    ++rep.layers;
    std::vector<std::array<double, 3>> next(frontier.size(), {0, 0, 0});
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      double mass = 0.0;
      for (int g : adjacent[frontier[i]]) {
        if (!done[g]) continue;
        const double a = std::max(area[g], 1e-300);
        for (int ch = 0; ch < 3; ++ch) next[i][ch] += a * color[g][ch];
        mass += a;
      }
      for (int ch = 0; ch < 3; ++ch) next[i][ch] /= mass;
    }
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      color[frontier[i]] = next[i];
      done[frontier[i]] = 1;
    }
    rep.flood_faces += frontier.size();
    std::vector<int> following;
    for (int f : frontier) {
      for (int g : adjacent[f]) {
        if (!done[g]) following.push_back(g);
      }
    }
    std::sort(following.begin(), following.end());
    following.erase(std::unique(following.begin(), following.end()), following.end());
    frontier = std::move(following);
  }

  std::array<double, 3> global{128, 128, 128};
  {
    std::array<double, 3> s{0, 0, 0};
    double mass = 0.0;
    for (std::size_t f = 0; f < nf; ++f) {
      if (!done[f]) continue;
      for (int ch = 0; ch < 3; ++ch) s[ch] += area[f] * color[f][ch];
      mass += area[f];
    }
    if (mass > 0) {
      for (int ch = 0; ch < 3; ++ch) global[ch] = s[ch] / mass;
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    if (done[f]) continue;
    color[f] = global;
    ++rep.fallback_faces;
  }

  for (std::size_t t = 0; t < out.state.size(); ++t) {
    if (out.state[t] != TexelState::kUntextured) continue;
    const int f = out.texel_face[t];
    if (count[f] > 0) ++rep.partial_texels;
    for (int ch = 0; ch < 3; ++ch) {
      out.image.pixels[4 * t + ch] =
          static_cast<std::uint8_t>(std::clamp(std::lround(color[f][ch]), 0L, 255L));
    }
    out.image.pixels[4 * t + 3] = 255;
    out.state[t] = TexelState::kTextured;
  }
  if (report) *report = rep;
  return out;
}

TextureAtlas inpaint_occlusions(const TriMesh& mesh, const TextureAtlas& atlas,
                                const InpaintParams& params, OcclusionReport* report,
                                OcclusionCanvas* canvas_out) {
  params.validate();
  const auto inpainter = make_inpainter(params.inpainter);
  OcclusionReport rep;
  TextureAtlas out = atlas;
  const std::vector<int> faces = untextured_faces(atlas, params.coverage_threshold);
  rep.untextured_faces = faces.size();
  if (!faces.empty() && atlas.count(TexelState::kTextured) > 0) {
    const auto clusters = cluster_occluded(mesh, faces, params, &rep.clustering);
    OcclusionCanvas canvas = build_canvas(mesh, atlas, clusters, faces, params);
    rep.mask_pixels = canvas.count(CanvasPixel::kMask);
    canvas = inpaint_canvas(canvas, *inpainter, &rep.inpaint);
    rep.reprojected_texels = reproject(mesh, canvas, faces, out);
    if (canvas_out) *canvas_out = std::move(canvas);
  }
  out = extrapolate(mesh, out, &rep.extrapolation);
  if (report) *report = std::move(rep);
  return out;
}

}  // namespace texmesh

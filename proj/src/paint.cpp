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

#include "texmesh/paint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace texmesh {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double projected_extent(const TriMesh& mesh, const Camera& cam) {
  const Vec3 r = cam.right(), u = cam.up();
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
  double lo_y = lo_x, hi_y = -lo_x;
  for (const Vec3& p : mesh.vertices) {
    const Vec3 d = p - cam.target;
    lo_x = std::min(lo_x, d.dot(r));
    hi_x = std::max(hi_x, d.dot(r));
    lo_y = std::min(lo_y, d.dot(u));
    hi_y = std::max(hi_y, d.dot(u));
  }
  if (mesh.vertices.empty()) return 0.0;
  const double aspect = static_cast<double>(cam.width) / cam.height;
  return std::max(hi_x - lo_x, (hi_y - lo_y) * aspect);
}

double fallback_extent(const TriMesh& mesh) {
  const Vec3 e = bounding_box(mesh).extent();
  const double m = e.maxCoeff();
  return m > 0 ? m : 1.0;
}

double signed_area(double ax, double ay, double bx, double by, double cx, double cy) {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

// Shelf packing in decreasing size order. Returns the used height or -1 if
// a block is wider than the atlas.
int pack(const std::vector<int>& sizes, int width, int pad, std::vector<AtlasBlock>& out) {
  std::vector<int> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sizes[a] > sizes[b]; });
  out.assign(sizes.size(), AtlasBlock{});
  int x = 0, y = 0, shelf = 0;
  for (int f : order) {
    const int s = sizes[f];
    if (s > width) return -1;
    if (x > 0 && x + s > width) {
      y += shelf + pad;
      x = 0;
      shelf = 0;
    }
    out[f] = {x, y, s};
    x += s + pad;
    shelf = std::max(shelf, s);
  }
  return y + shelf;
}

std::vector<int> block_sizes(const std::vector<double>& areas, double density) {
  std::vector<int> sizes(areas.size());
  for (std::size_t f = 0; f < areas.size(); ++f) {
    const double s = std::round(std::sqrt(areas[f]) * density);
    sizes[f] = static_cast<int>(std::clamp(s, 1.0, 1e9));
  }
  return sizes;
}

}  // namespace

void Camera::validate() const {
  if (width < 16 || height < 16) throw InvalidArgument("camera resolution must be >= 16x16");
  if (!(ortho_scale > 0) || !std::isfinite(ortho_scale)) {
    throw InvalidArgument("ortho_scale must be positive");
  }
  if (!(distance > 0)) throw InvalidArgument("camera distance must be positive");
}

Vec3 Camera::direction() const {
  const double t = azimuth_deg * kDeg, p = elevation_deg * kDeg;
  return -Vec3(std::cos(p) * std::sin(t), -std::cos(p) * std::cos(t), std::sin(p));
}

Vec3 Camera::right() const {
  const Vec3 r = direction().cross(Vec3::UnitZ());
  if (r.norm() > 1e-9) return r.normalized();
  const double t = azimuth_deg * kDeg;
  return Vec3(std::cos(t), std::sin(t), 0.0);
}

Vec3 Camera::up() const { return right().cross(direction()).normalized(); }

Vec3 Camera::project(const Vec3& p) const {
  const Vec3 rel = p - eye();
  const double s = pixel_size();
  return Vec3(0.5 * width + rel.dot(right()) / s, 0.5 * height - rel.dot(up()) / s,
              rel.dot(direction()));
}

Vec3 Camera::unproject(double x, double y) const {
  const double s = pixel_size();
  return eye() + (x - 0.5 * width) * s * right() - (y - 0.5 * height) * s * up();
}

Camera camera_for_direction(const TriMesh& mesh, const Vec3& view_dir, int width, int height,
                            double margin) {
  if (view_dir.norm() == 0) throw InvalidArgument("view direction must be non-zero");
  const Vec3 s = -view_dir.normalized();
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.elevation_deg = std::asin(std::clamp(s.z(), -1.0, 1.0)) / kDeg;
  cam.azimuth_deg = std::atan2(s.x(), -s.y()) / kDeg;
  const BoundingBox box = bounding_box(mesh);
  cam.target = box.center();
  cam.distance = std::max(box.diagonal(), 1e-6);
  const double extent = projected_extent(mesh, cam);
  cam.ortho_scale = margin * (extent > 1e-12 ? extent : fallback_extent(mesh));
  cam.validate();
  return cam;
}

std::vector<Camera> default_cameras(const TriMesh& mesh, int resolution) {
  std::vector<Camera> cams;
  double extent = 0.0;
  for (double az : {0.0, 90.0, 180.0, 270.0}) {
    Camera cam;
    cam.azimuth_deg = az;
    cam.width = cam.height = resolution;
    const BoundingBox box = bounding_box(mesh);
    cam.target = box.center();
    cam.distance = std::max(box.diagonal(), 1e-6);
    cam.role = (az == 0.0 || az == 180.0) ? ViewRole::kPrimary : ViewRole::kSide;
    extent = std::max(extent, projected_extent(mesh, cam));
    cams.push_back(cam);
  }
  if (!(extent > 1e-12)) extent = fallback_extent(mesh);
  for (Camera& cam : cams) {
    cam.ortho_scale = 1.1 * extent;
    cam.validate();
  }
  return cams;
}

std::size_t RenderBuffers::covered_pixels() const {
  return std::count_if(face_id.begin(), face_id.end(), [](int f) { return f >= 0; });
}

RenderBuffers rasterize(const TriMesh& mesh, const Camera& camera) {
  camera.validate();
  RenderBuffers buf;
  buf.width = camera.width;
  buf.height = camera.height;
  const std::size_t n = static_cast<std::size_t>(buf.width) * buf.height;
  buf.depth.assign(n, std::numeric_limits<double>::infinity());
  buf.face_id.assign(n, -1);
  buf.normal.assign(n, Vec3::Zero());

  std::vector<Vec3> screen(mesh.num_vertices());
  for (std::size_t v = 0; v < screen.size(); ++v) screen[v] = camera.project(mesh.vertices[v]);
  const std::vector<Vec3> normals = mesh.face_normals();

  parallel_for(static_cast<std::size_t>(buf.height), [&](std::size_t row0, std::size_t row1) {
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
      const Vec3& a = screen[mesh.faces[f][0]];
      const Vec3& b = screen[mesh.faces[f][1]];
      const Vec3& c = screen[mesh.faces[f][2]];
      const double area = signed_area(a.x(), a.y(), b.x(), b.y(), c.x(), c.y());
      if (std::abs(area) < 1e-18) continue;
      const double ymin = std::min({a.y(), b.y(), c.y()});
      const double ymax = std::max({a.y(), b.y(), c.y()});
      const double xmin = std::min({a.x(), b.x(), c.x()});
      const double xmax = std::max({a.x(), b.x(), c.x()});
      // Pixel centres at i + 0.5 inside [min, max].
      const long y0 = std::max<long>(static_cast<long>(row0), std::lround(std::ceil(ymin - 0.5)));
      const long y1 = std::min<long>(static_cast<long>(row1) - 1,
                                     std::lround(std::floor(ymax - 0.5)));
      const long x0 = std::max<long>(0, std::lround(std::ceil(xmin - 0.5)));
      const long x1 = std::min<long>(buf.width - 1, std::lround(std::floor(xmax - 0.5)));
      for (long y = y0; y <= y1; ++y) {
        const double py = y + 0.5;
        for (long x = x0; x <= x1; ++x) {
          const double px = x + 0.5;
          const double w0 = signed_area(b.x(), b.y(), c.x(), c.y(), px, py) / area;
          const double w1 = signed_area(c.x(), c.y(), a.x(), a.y(), px, py) / area;
          const double w2 = signed_area(a.x(), a.y(), b.x(), b.y(), px, py) / area;
          if (w0 < 0 || w1 < 0 || w2 < 0) continue;
          // Relative form: equal vertex depths give exactly equal pixel depths.
          const double z = a.z() + w1 * (b.z() - a.z()) + w2 * (c.z() - a.z());
          if (z < 0) continue;
          const std::size_t i = buf.index(static_cast<int>(x), static_cast<int>(y));
          if (z < buf.depth[i]) {
            buf.depth[i] = z;
            buf.face_id[i] = static_cast<int>(f);
            buf.normal[i] = normals[f];
          }
        }
      }
    }
  });
  return buf;
}

std::vector<double> confidence(const TriMesh& mesh, const Camera& camera) {
  const Vec3 d = camera.direction();
  std::vector<double> c(mesh.num_faces());
  for (std::size_t f = 0; f < c.size(); ++f) {
    c[f] = std::clamp(-d.dot(mesh.face_normal(f)), 0.0, 1.0);
  }
  return c;
}

void AtlasParams::validate() const {
  if (!(texel_density > 0)) throw InvalidArgument("texel density must be positive");
  if (max_size < 1) throw InvalidArgument("max atlas size must be positive");
  if (padding < 2) throw InvalidArgument("atlas padding must be at least 2");
  if (fixed_size < 0) throw InvalidArgument("fixed atlas size must be non-negative");
}

Vec3 TextureAtlas::barycentric(int x, int y) const {
  const AtlasBlock& b = blocks[texel_face[index(x, y)]];
  const double u = (x - b.x + 0.5) / b.size;
  const double v = (y - b.y + 0.5) / b.size;
  return Vec3(1.0 - u - v, u, v);
}

Vec3 TextureAtlas::surface_point(const TriMesh& mesh, int x, int y) const {
  const Face& f = mesh.faces[texel_face[index(x, y)]];
  const Vec3 w = barycentric(x, y);
  return w[0] * mesh.vertices[f[0]] + w[1] * mesh.vertices[f[1]] + w[2] * mesh.vertices[f[2]];
}

Vec2 TextureAtlas::uv(std::size_t f, int k) const {
  const AtlasBlock& b = blocks[f];
  const double x = b.x + (k == 1 ? b.size : 0);
  const double y = b.y + (k == 2 ? b.size : 0);
  return Vec2(x / width, 1.0 - y / height);
}

std::size_t TextureAtlas::count(TexelState s) const {
  return std::count(state.begin(), state.end(), s);
}

TextureAtlas build_atlas(const TriMesh& mesh, const AtlasParams& params) {
  params.validate();
  if (mesh.empty()) throw InvalidArgument("cannot build an atlas for an empty mesh");
  const std::vector<double> areas = mesh.face_areas();
  TextureAtlas atlas;
  int width = 0, height = 0;
  double density = params.texel_density;
  if (params.fixed_size > 0) {
    width = params.fixed_size;
    auto fits = [&](double d) {
      const int h = pack(block_sizes(areas, d), width, params.padding, atlas.blocks);
      return h >= 0 && h <= width;
    };
    if (!fits(0.0)) throw InvalidArgument("too many faces for the fixed atlas size");
    double lo = 0.0, hi = 1.0;
    while (fits(hi) && hi < 1e9) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (fits(mid) ? lo : hi) = mid;
    }
    density = lo;
    pack(block_sizes(areas, density), width, params.padding, atlas.blocks);
    height = width;
  } else {
    for (;;) {
      const std::vector<int> sizes = block_sizes(areas, density);
      double total = 0.0;
      int largest = 1;
      for (int s : sizes) {
        total += static_cast<double>(s + params.padding) * (s + params.padding);
        largest = std::max(largest, s);
      }
      width = std::max(largest, static_cast<int>(std::ceil(std::sqrt(total))));
      height = width <= params.max_size ? pack(sizes, width, params.padding, atlas.blocks) : -1;
      if (height >= 0 && height <= params.max_size) break;
      if (largest == 1) throw InvalidArgument("too many faces for the maximum atlas size");
      density *= 0.9;
    }
    height = std::max(height, 1);
  }
  atlas.width = width;
  atlas.height = height;
  atlas.texel_density = density;
  atlas.image = Image(width, height, {0, 0, 0, 0});
  atlas.state.assign(static_cast<std::size_t>(width) * height, TexelState::kBackground);
  atlas.texel_face.assign(atlas.state.size(), -1);
  for (std::size_t f = 0; f < atlas.blocks.size(); ++f) {
    const AtlasBlock& b = atlas.blocks[f];
    for (int j = 0; j < b.size; ++j) {
      for (int i = 0; i + j + 1 <= b.size; ++i) {
        const std::size_t t = atlas.index(b.x + i, b.y + j);
        atlas.texel_face[t] = static_cast<int>(f);
        atlas.state[t] = TexelState::kUntextured;
      }
    }
  }
  return atlas;
}

TextureAtlas backproject(const TriMesh& mesh, const TextureAtlas& atlas,
                         const std::vector<View>& views, const BlendParams& params) {
  if (atlas.blocks.size() != mesh.num_faces()) {
    throw InvalidArgument("atlas does not match the mesh");
  }
  if (!(params.beta > 0)) throw InvalidArgument("beta must be positive");
  if (params.side_suppression < 0 || params.side_suppression > 1) {
    throw InvalidArgument("side suppression must be in [0,1]");
  }
  const double bias = params.depth_bias.value_or(1e-3 * bounding_box(mesh).diagonal());
  const std::size_t nf = mesh.num_faces();

  std::vector<RenderBuffers> buffers;
  std::vector<std::vector<double>> weight;
  std::vector<double> primary(nf, 0.0);
  for (const View& v : views) {
    v.camera.validate();
    if (v.image.width != v.camera.width || v.image.height != v.camera.height) {
      throw InvalidArgument("view image does not match the camera resolution");
    }
    buffers.push_back(rasterize(mesh, v.camera));
    weight.push_back(confidence(mesh, v.camera));
    if (v.camera.role == ViewRole::kPrimary) {
      for (std::size_t f = 0; f < nf; ++f) primary[f] = std::max(primary[f], weight.back()[f]);
    }
  }
  for (std::size_t k = 0; k < views.size(); ++k) {
    for (std::size_t f = 0; f < nf; ++f) {
      double prio = 1.0;
      if (views[k].camera.role == ViewRole::kSide) {
        prio = std::max(0.0, 1.0 - params.side_suppression * primary[f]);
      }
      weight[k][f] = prio * std::pow(weight[k][f], params.beta);
    }
  }

  TextureAtlas out = atlas;
  parallel_for(static_cast<std::size_t>(atlas.height), [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < atlas.width; ++x) {
        const std::size_t t = atlas.index(x, y);
        const int f = atlas.texel_face[t];
        if (f < 0) continue;
        const Vec3 p = atlas.surface_point(mesh, x, y);
        double sum[3] = {0, 0, 0};
        double total = 0.0;
        for (std::size_t k = 0; k < views.size(); ++k) {
          const double w = weight[k][f];
          if (!(w > 0)) continue;
          const Camera& cam = views[k].camera;
          const Vec3 s = cam.project(p);
          const long px = std::lround(std::floor(s.x()));
          const long py = std::lround(std::floor(s.y()));
          if (px < 0 || py < 0 || px >= cam.width || py >= cam.height) continue;
          const std::size_t pi = buffers[k].index(static_cast<int>(px), static_cast<int>(py));
          const int front = buffers[k].face_id[pi];
          if (front < 0 || (front != f && s.z() > buffers[k].depth[pi] + bias)) continue;
          const Rgba c = views[k].image.at(static_cast<int>(px), static_cast<int>(py));
          for (int ch = 0; ch < 3; ++ch) sum[ch] += w * c[ch];
          total += w;
        }
        const std::size_t i = 4 * t;
        if (total > 0) {
          for (int ch = 0; ch < 3; ++ch) {
            out.image.pixels[i + ch] =
                static_cast<std::uint8_t>(std::clamp(std::lround(sum[ch] / total), 0L, 255L));
          }
          out.image.pixels[i + 3] = 255;
          out.state[t] = TexelState::kTextured;
        } else {
          for (int ch = 0; ch < 4; ++ch) out.image.pixels[i + ch] = 0;
          out.state[t] = TexelState::kUntextured;
        }
      }
    }
  });
  return out;
}

std::vector<double> face_coverage(const TextureAtlas& atlas) {
  std::vector<double> textured(atlas.blocks.size(), 0.0), total(atlas.blocks.size(), 0.0);
  for (std::size_t t = 0; t < atlas.state.size(); ++t) {
    const int f = atlas.texel_face[t];
    if (f < 0) continue;
    total[f] += 1;
    if (atlas.state[t] == TexelState::kTextured) textured[f] += 1;
  }
  for (std::size_t f = 0; f < total.size(); ++f) {
    textured[f] = total[f] > 0 ? textured[f] / total[f] : 0.0;
  }
  return textured;
}

std::vector<int> untextured_faces(const TextureAtlas& atlas, double threshold) {
  const std::vector<double> cov = face_coverage(atlas);
  std::vector<int> out;
  for (std::size_t f = 0; f < cov.size(); ++f) {
    if (cov[f] < threshold) out.push_back(static_cast<int>(f));
  }
  return out;
}

Image export_image(const TextureAtlas& atlas, int dilation) {
  Image img = atlas.image;
  std::vector<char> filled(atlas.state.size(), 0);
  for (std::size_t t = 0; t < atlas.state.size(); ++t) {
    img.pixels[4 * t + 3] = atlas.state[t] == TexelState::kTextured ? 255 : 0;
    filled[t] = atlas.state[t] != TexelState::kBackground;
  }
  for (int pass = 0; pass < dilation; ++pass) {
    const Image prev = img;
    const std::vector<char> was = filled;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const std::size_t t = atlas.index(x, y);
        if (was[t]) continue;
        int sum[3] = {0, 0, 0}, n = 0;
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = x + dx[k], ny = y + dy[k];
          if (nx < 0 || ny < 0 || nx >= img.width || ny >= img.height) continue;
          if (!was[atlas.index(nx, ny)]) continue;
          const Rgba c = prev.at(nx, ny);
          for (int ch = 0; ch < 3; ++ch) sum[ch] += c[ch];
          ++n;
        }
        if (n == 0) continue;
        for (int ch = 0; ch < 3; ++ch) {
          img.pixels[4 * t + ch] = static_cast<std::uint8_t>((sum[ch] + n / 2) / n);
        }
        filled[t] = 1;
      }
    }
  }
  return img;
}

}  // namespace texmesh

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

#include <optional>
#include <vector>

#include "texmesh/image.hpp"
#include "texmesh/mesh.hpp"

namespace texmesh {

enum class ViewRole {
  kPrimary,  // front and back views, full priority
  kSide,     // suppressed where the primary views already see the surface
};

// Orthographic camera orbiting `target`. Azimuth turns about +z; azimuth 0
// looks along +y, azimuth 90 along -x.
struct Camera {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double ortho_scale = 1.0;  // world units across the image width
  int width = 512;
  int height = 512;
  Vec3 target = Vec3::Zero();
  double distance = 1.0;  // eye to target
  ViewRole role = ViewRole::kPrimary;

  // Throws InvalidArgument unless the resolution is at least 16x16,
  // ortho_scale > 0 and distance > 0.
  void validate() const;

  Vec3 direction() const;  // unit view direction d
  Vec3 right() const;
  Vec3 up() const;
  Vec3 eye() const { return target - distance * direction(); }
  double pixel_size() const { return ortho_scale / width; }

  // Continuous pixel coordinates (x right, y down) and depth along d.
  Vec3 project(const Vec3& p) const;
  // World point on the image plane through the eye for pixel coordinates.
  Vec3 unproject(double x, double y) const;
};

// Camera looking along `view_dir`, aimed and scaled to fit `mesh`.
Camera camera_for_direction(const TriMesh& mesh, const Vec3& view_dir, int width, int height,
                            double margin = 1.1);

// Azimuths 0, 90, 180, 270 at elevation 0, fit to the mesh with a common
// ortho_scale of 1.1 times the largest projected extent. 0 and 180 are the
// primary views.
std::vector<Camera> default_cameras(const TriMesh& mesh, int resolution = 512);

struct RenderBuffers {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // +inf for background
  std::vector<int> face_id;   // -1 for background
  std::vector<Vec3> normal;   // unit face normal, zero for background

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  std::size_t covered_pixels() const;
};

// Pixel centres are sampled; the nearest depth wins and equal depths go to
// the lower face index.
RenderBuffers rasterize(const TriMesh& mesh, const Camera& camera);

// Per face: clamp(dot(-d, n), 0, 1).
std::vector<double> confidence(const TriMesh& mesh, const Camera& camera);

enum class TexelState : std::uint8_t { kBackground = 0, kUntextured = 1, kTextured = 2 };

struct AtlasBlock {
  int x = 0;
  int y = 0;
  int size = 1;
};

struct AtlasParams {
  double texel_density = 64.0;  // texels per unit sqrt(area)
  int max_size = 4096;
  int padding = 2;
  // Non-zero: square atlas of this size, density chosen as large as fits.
  int fixed_size = 0;

  void validate() const;
};

// One square block per face; the face covers the lower-left triangle of its
// block. Texel (i, j) of a block maps to barycentric (1 - u - v, u, v) with
// u = (i + 0.5) / size, v = (j + 0.5) / size, when u + v <= 1.
struct TextureAtlas {
  int width = 0;
  int height = 0;
  double texel_density = 0.0;
  std::vector<AtlasBlock> blocks;  // per face
  Image image;
  std::vector<TexelState> state;
  std::vector<int> texel_face;  // -1 for background

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  // Barycentric coordinates of a face texel.
  Vec3 barycentric(int x, int y) const;
  Vec3 surface_point(const TriMesh& mesh, int x, int y) const;
  // Texture coordinate of block corner k (0..2) of face f, OBJ convention
  // (origin bottom left).
  Vec2 uv(std::size_t f, int k) const;
  std::size_t count(TexelState s) const;
};

TextureAtlas build_atlas(const TriMesh& mesh, const AtlasParams& params = {});

struct View {
  Camera camera;
  Image image;
};

struct BlendParams {
  double beta = 4.0;
  double side_suppression = 0.7;
  std::optional<double> depth_bias;  // default 1e-3 * bbox diagonal
};

// Blends the views into the atlas. Texels seen by no view (or only at
// grazing angles) become untextured.
TextureAtlas backproject(const TriMesh& mesh, const TextureAtlas& atlas,
                         const std::vector<View>& views, const BlendParams& params = {});

// Textured fraction of each face's texels.
std::vector<double> face_coverage(const TextureAtlas& atlas);
std::vector<int> untextured_faces(const TextureAtlas& atlas, double threshold = 0.5);

// Atlas image for export: alpha is 255 on textured texels and 0 elsewhere;
// background texels take the colour of a neighbouring face texel so
// filtering at block edges does not bleed black.
Image export_image(const TextureAtlas& atlas, int dilation = 2);

}  // namespace texmesh

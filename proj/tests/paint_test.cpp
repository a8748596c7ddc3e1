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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "test_fixtures.hpp"
#include "texmesh/paint.hpp"

namespace texmesh {
namespace {

View solid_view(const Camera& cam, Rgba c) { return {cam, Image(cam.width, cam.height, c)}; }

bool orthonormal(const Camera& c) {
  const Vec3 d = c.direction(), r = c.right(), u = c.up();
  return std::abs(d.norm() - 1) < 1e-12 && std::abs(r.norm() - 1) < 1e-12 &&
         std::abs(u.norm() - 1) < 1e-12 && std::abs(d.dot(r)) < 1e-12 &&
         std::abs(d.dot(u)) < 1e-12 && std::abs(r.dot(u)) < 1e-12;
}

TEST(Fixtures, OrientedOutward) {
  EXPECT_NEAR(enclosed_volume(testing::unit_cube()), 1.0, 1e-12);
  EXPECT_GT(enclosed_volume(testing::uv_sphere(8, 16)), 0.0);
  EXPECT_TRUE(EdgeTable(testing::uv_sphere(8, 16)).is_closed_manifold());
}

TEST(Cameras, DefaultViewsLookAlongHorizontalAxes) {
  const auto cams = default_cameras(testing::unit_cube(), 64);
  ASSERT_EQ(cams.size(), 4u);
  const Vec3 expected[4] = {Vec3::UnitY(), -Vec3::UnitX(), -Vec3::UnitY(), Vec3::UnitX()};
  for (int k = 0; k < 4; ++k) {
    EXPECT_LT((cams[k].direction() - expected[k]).norm(), 1e-12) << k;
    EXPECT_TRUE(orthonormal(cams[k]));
    EXPECT_EQ(cams[k].width, 64);
    EXPECT_EQ(cams[k].ortho_scale, cams[0].ortho_scale);
    // Everything in front of the eye.
    for (const Vec3& v : testing::unit_cube().vertices) EXPECT_GT(cams[k].project(v).z(), 0.0);
  }
  EXPECT_EQ(cams[0].role, ViewRole::kPrimary);
  EXPECT_EQ(cams[1].role, ViewRole::kSide);
  EXPECT_EQ(cams[2].role, ViewRole::kPrimary);
  EXPECT_EQ(cams[3].role, ViewRole::kSide);
}

TEST(Cameras, ScaleOfUnitSphere) {
  const auto cams = default_cameras(testing::uv_sphere(16, 32), 128);
  for (const Camera& c : cams) EXPECT_NEAR(c.ortho_scale, 2.2, 1e-6);
}

TEST(Cameras, DegenerateMeshStillHasScale) {
  TriMesh point;
  point.vertices.assign(3, Vec3(1, 2, 3));
  point.faces.push_back({0, 1, 2});
  for (const Camera& c : default_cameras(point, 32)) EXPECT_GT(c.ortho_scale, 0.0);
  const TriMesh flat =
      testing::single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  for (const Camera& c : default_cameras(flat, 32)) EXPECT_NEAR(c.ortho_scale, 1.1, 1e-12);
}

TEST(Cameras, PolarElevationKeepsBasis) {
  Camera c;
  c.elevation_deg = 90;
  c.azimuth_deg = 30;
  EXPECT_TRUE(orthonormal(c));
  EXPECT_LT((c.direction() + Vec3::UnitZ()).norm(), 1e-12);
}

TEST(Cameras, ProjectUnprojectRoundTrip) {
  const Camera cam = camera_for_direction(testing::unit_cube(), Vec3(1, 2, -0.5), 80, 60);
  EXPECT_TRUE(orthonormal(cam));
  EXPECT_LT((cam.direction() - Vec3(1, 2, -0.5).normalized()).norm(), 1e-12);
  const Vec3 p(0.3, 0.2, 0.9);
  const Vec3 s = cam.project(p);
  const Vec3 back = cam.unproject(s.x(), s.y()) + s.z() * cam.direction();
  EXPECT_LT((back - p).norm(), 1e-12);
}

TEST(Cameras, ValidateRejectsBadParameters) {
  Camera c;
  c.width = 8;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.width = 32;
  c.ortho_scale = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Rasterize, TriangleCoversItsPixels) {
  const Vec3 a(0.1, 0.0, 0.1), b(0.8, 0.0, 0.3), c(0.4, 0.0, 0.9);
  const TriMesh tri = testing::single_triangle(a, b, c);
  Camera cam;
  cam.width = cam.height = 48;
  cam.ortho_scale = 1.0;
  cam.target = Vec3(0.5, 0.0, 0.5);
  cam.distance = 2.0;
  const RenderBuffers buf = rasterize(tri, cam);
  std::size_t inside = 0;
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      // Camera at azimuth 0: image x is world +x, image y is world -z.
      const double wx = 0.5 + (x + 0.5 - 24) / 48.0;
      const double wz = 0.5 - (y + 0.5 - 24) / 48.0;
      auto edge = [&](const Vec3& p, const Vec3& q) {
        return (q.x() - p.x()) * (wz - p.z()) - (q.z() - p.z()) * (wx - p.x());
      };
      const double e0 = edge(a, b), e1 = edge(b, c), e2 = edge(c, a);
      const double m = std::min({std::abs(e0), std::abs(e1), std::abs(e2)});
      const bool in = (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
      const int id = buf.face_id[buf.index(x, y)];
      if (m < 1e-9) continue;
      EXPECT_EQ(id, in ? 0 : -1) << x << "," << y;
      EXPECT_EQ(std::isfinite(buf.depth[buf.index(x, y)]), id >= 0);
      if (in) {
        ++inside;
        EXPECT_NEAR(buf.depth[buf.index(x, y)], 2.0, 1e-12);
      }
    }
  }
  EXPECT_GT(inside, 100u);
}

TEST(Rasterize, EqualDepthGoesToLowerIndex) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(1, 0, 1)};
  m.faces = {{0, 1, 2}, {1, 3, 0}};  // both cover the square's lower-right half
  Camera cam;
  cam.width = cam.height = 32;
  cam.ortho_scale = 1.2;
  cam.target = Vec3(0.5, 0, 0.5);
  cam.distance = 3;
  const RenderBuffers one = rasterize(m, cam);
  std::swap(m.faces[0], m.faces[1]);
  const RenderBuffers two = rasterize(m, cam);
  std::size_t shared = 0;
  for (std::size_t i = 0; i < one.face_id.size(); ++i) {
    if (one.face_id[i] < 0) continue;
    // Pixels covered by both triangles belong to face 0 in both orders.
    const Vec3 p = cam.unproject(i % 32 + 0.5, i / 32 + 0.5);
    const double x = p.x(), z = p.z();
    if (x + z < 1 && z < x) {
      ++shared;
      EXPECT_EQ(one.face_id[i], 0);
      EXPECT_EQ(two.face_id[i], 0);
    }
  }
  EXPECT_GT(shared, 50u);
}

TEST(Rasterize, SphereSilhouetteMatchesDisc) {
  const TriMesh s = testing::uv_sphere(96, 192, Vec3::Zero(), 1.0);
  for (const Camera& cam : default_cameras(s, 256)) {
    const RenderBuffers buf = rasterize(s, cam);
    const double r_px = cam.width / cam.ortho_scale;
    const double disc = std::numbers::pi * r_px * r_px;
    EXPECT_NEAR(static_cast<double>(buf.covered_pixels()) / disc, 1.0, 0.01);
    const std::size_t centre = buf.index(128, 128);
    EXPECT_NEAR(buf.depth[centre], cam.distance - 1.0, 2e-3);
    EXPECT_GT(buf.normal[centre].dot(-cam.direction()), 0.99);
  }
}

TEST(Rasterize, IndependentOfWorkerCount) {
  const TriMesh& s = testing::sphere_mesh(32);
  const Camera cam = default_cameras(s, 96)[1];
  set_worker_count(1);
  const RenderBuffers a = rasterize(s, cam);
  set_worker_count(3);
  const RenderBuffers b = rasterize(s, cam);
  set_worker_count(1);
  EXPECT_EQ(a.face_id, b.face_id);
  EXPECT_EQ(a.depth, b.depth);
}

TEST(Confidence, CosineOfIncidence) {
  Camera cam;  // looks along +y
  const double s60 = std::sin(std::numbers::pi / 3), c60 = 0.5;
  TriMesh m;
  // Normals: -y (facing the camera), +x (perpendicular), 60 degrees, +y (away).
  auto add = [&](const Vec3& n) {
    const Vec3 t = n.unitOrthogonal(), b = n.cross(t);
    const int base = static_cast<int>(m.vertices.size());
    m.vertices.insert(m.vertices.end(), {Vec3::Zero(), t, b});
    m.faces.push_back({base, base + 1, base + 2});
  };
  add(-Vec3::UnitY());
  add(Vec3::UnitX());
  add(Vec3(s60, -c60, 0));
  add(Vec3::UnitY());
  const auto c = confidence(m, cam);
  EXPECT_NEAR(c[0], 1.0, 1e-12);
  EXPECT_NEAR(c[1], 0.0, 1e-12);
  EXPECT_NEAR(c[2], 0.5, 1e-12);
  EXPECT_EQ(c[3], 0.0);
}

TEST(Confidence, MatchesDotProductOnRandomFaces) {
  const TriMesh& s = testing::sphere_mesh(64);
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, s.num_faces() - 1);
  for (const Camera& cam : default_cameras(s, 64)) {
    const auto c = confidence(s, cam);
    const Vec3 d = cam.direction();
    for (int k = 0; k < 1000; ++k) {
      const std::size_t f = pick(rng);
      const Vec3& a = s.vertices[s.faces[f][0]];
      const Vec3 n = (s.vertices[s.faces[f][1]] - a).cross(s.vertices[s.faces[f][2]] - a);
      EXPECT_NEAR(c[f], std::clamp(-d.dot(n.normalized()), 0.0, 1.0), 1e-6);
    }
  }
}

TEST(Atlas, BlocksAreDisjointAndComplete) {
  const TriMesh m = testing::icosphere(2, Vec3::Zero(), 1.0);
  const TextureAtlas atlas = build_atlas(m, {.texel_density = 30.0});
  ASSERT_EQ(atlas.blocks.size(), m.num_faces());
  const auto areas = m.face_areas();
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    const AtlasBlock& b = atlas.blocks[f];
    EXPECT_EQ(b.size, std::max(1, static_cast<int>(std::lround(std::sqrt(areas[f]) * 30.0))));
    EXPECT_GE(b.x, 0);
    EXPECT_GE(b.y, 0);
    EXPECT_LE(b.x + b.size, atlas.width);
    EXPECT_LE(b.y + b.size, atlas.height);
    for (std::size_t g = f + 1; g < m.num_faces(); ++g) {
      const AtlasBlock& o = atlas.blocks[g];
      const bool apart = b.x + b.size + 2 <= o.x || o.x + o.size + 2 <= b.x ||
                         b.y + b.size + 2 <= o.y || o.y + o.size + 2 <= b.y;
      EXPECT_TRUE(apart) << f << " " << g;
    }
  }
  std::vector<std::size_t> per_face(m.num_faces(), 0);
  for (int y = 0; y < atlas.height; ++y) {
    for (int x = 0; x < atlas.width; ++x) {
      const int f = atlas.texel_face[atlas.index(x, y)];
      EXPECT_EQ(f < 0, atlas.state[atlas.index(x, y)] == TexelState::kBackground);
      if (f < 0) continue;
      ++per_face[f];
      const Vec3 w = atlas.barycentric(x, y);
      EXPECT_GE(w.minCoeff(), -1e-12);
      EXPECT_NEAR(w.sum(), 1.0, 1e-12);
      // The texel centre interpolated from the corner uvs lands on the texel.
      const Vec2 uv = w[0] * atlas.uv(f, 0) + w[1] * atlas.uv(f, 1) + w[2] * atlas.uv(f, 2);
      EXPECT_NEAR(uv.x() * atlas.width, x + 0.5, 1e-9);
      EXPECT_NEAR((1.0 - uv.y()) * atlas.height, y + 0.5, 1e-9);
    }
  }
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    const int s = atlas.blocks[f].size;
    EXPECT_EQ(per_face[f], static_cast<std::size_t>(s * (s + 1) / 2));
  }
}

TEST(Atlas, RespectsSizeLimits) {
  const TriMesh& s = testing::sphere_mesh(32);
  const TextureAtlas capped = build_atlas(s, {.texel_density = 1e5, .max_size = 512});
  EXPECT_LE(capped.width, 512);
  EXPECT_LE(capped.height, 512);
  const TextureAtlas fixed = build_atlas(s, {.fixed_size = 256});
  EXPECT_EQ(fixed.width, 256);
  EXPECT_EQ(fixed.height, 256);
  EXPECT_GT(fixed.count(TexelState::kUntextured), 256u * 256u / 8);
  EXPECT_THROW(build_atlas(s, {.padding = 1}), InvalidArgument);
}

class Backproject : public ::testing::Test {
 protected:
  static const TriMesh& mesh() { return testing::sphere_mesh(48); }
  static const TextureAtlas& atlas() {
    static const TextureAtlas a = build_atlas(mesh(), {.fixed_size = 512});
    return a;
  }
  static std::vector<View> solid_views(const std::array<Rgba, 4>& colors) {
    std::vector<View> views;
    const auto cams = default_cameras(mesh(), 256);
    for (int k = 0; k < 4; ++k) views.push_back(solid_view(cams[k], colors[k]));
    return views;
  }
};

TEST_F(Backproject, SolidViewsBlendConvexly) {
  const std::array<Rgba, 4> colors = {Rgba{255, 0, 0, 255}, Rgba{0, 255, 0, 255},
                                      Rgba{0, 0, 255, 255}, Rgba{0, 0, 0, 255}};
  const auto views = solid_views(colors);
  const TextureAtlas out = backproject(mesh(), atlas(), views);
  // Only the polar caps and their silhouette rims are missed by horizontal views.
  const auto nrm = mesh().face_normals();
  for (std::size_t t = 0; t < out.state.size(); ++t) {
    if (out.state[t] == TexelState::kUntextured) {
      EXPECT_GT(std::abs(nrm[out.texel_face[t]].z()), 0.5);
    }
  }
  for (std::size_t t = 0; t < out.state.size(); ++t) {
    if (out.state[t] != TexelState::kTextured) continue;
    const int r = out.image.pixels[4 * t], g = out.image.pixels[4 * t + 1],
              b = out.image.pixels[4 * t + 2];
    // Hull of the four colours: r, g, b >= 0 and r + g + b <= 255 (+ rounding).
    EXPECT_LE(r + g + b, 257);
    EXPECT_EQ(out.image.pixels[4 * t + 3], 255);
  }
  // Faces facing +x are seen head-on by the azimuth-90 view only.
  const auto normals = mesh().face_normals();
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const int f = out.texel_face[out.index(x, y)];
      if (f < 0) continue;
      if (normals[f].x() > 0.999) {
        EXPECT_EQ(out.image.at(x, y), colors[1]);
      }
      if (normals[f].x() < -0.999) {
        EXPECT_EQ(out.image.at(x, y), colors[3]);
      }
    }
  }
}

TEST_F(Backproject, EqualViewsGiveThatColour) {
  const Rgba gray{128, 128, 128, 255};
  const TextureAtlas out = backproject(mesh(), atlas(), solid_views({gray, gray, gray, gray}));
  for (std::size_t t = 0; t < out.state.size(); ++t) {
    if (out.state[t] != TexelState::kTextured) continue;
    for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(out.image.pixels[4 * t + ch], 128);
  }
}

TEST_F(Backproject, TexturedTexelsReprojectIntoASilhouette) {
  const auto views = solid_views({Rgba{9, 9, 9, 255}, Rgba{9, 9, 9, 255}, Rgba{9, 9, 9, 255},
                                  Rgba{9, 9, 9, 255}});
  const TextureAtlas out = backproject(mesh(), atlas(), views);
  std::vector<RenderBuffers> bufs;
  for (const View& v : views) bufs.push_back(rasterize(mesh(), v.camera));
  for (int y = 0; y < out.height; y += 3) {
    for (int x = 0; x < out.width; x += 3) {
      if (out.state[out.index(x, y)] != TexelState::kTextured) continue;
      const Vec3 p = out.surface_point(mesh(), x, y);
      bool seen = false;
      for (std::size_t k = 0; k < views.size(); ++k) {
        const Vec3 s = views[k].camera.project(p);
        const int px = static_cast<int>(std::floor(s.x())), py = static_cast<int>(std::floor(s.y()));
        if (px >= 0 && py >= 0 && px < bufs[k].width && py < bufs[k].height &&
            bufs[k].face_id[bufs[k].index(px, py)] >= 0) {
          seen = true;
        }
      }
      EXPECT_TRUE(seen);
    }
  }
}

TEST_F(Backproject, DeterministicAcrossWorkers) {
  const auto views = solid_views({Rgba{200, 10, 10, 255}, Rgba{10, 200, 10, 255},
                                  Rgba{10, 10, 200, 255}, Rgba{90, 90, 90, 255}});
  set_worker_count(1);
  const TextureAtlas a = backproject(mesh(), atlas(), views);
  set_worker_count(4);
  const TextureAtlas b = backproject(mesh(), atlas(), views);
  set_worker_count(1);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.state, b.state);
}

TEST_F(Backproject, NoViewsLeavesEverythingUntextured) {
  const TextureAtlas out = backproject(mesh(), atlas(), {});
  EXPECT_EQ(out.count(TexelState::kTextured), 0u);
  EXPECT_EQ(untextured_faces(out).size(), mesh().num_faces());
}

TEST_F(Backproject, RejectsMismatchedImage) {
  auto views = solid_views({Rgba{}, Rgba{}, Rgba{}, Rgba{}});
  views[2].image = Image(10, 10);
  EXPECT_THROW(backproject(mesh(), atlas(), views), InvalidArgument);
}

TEST(BackprojectBowl, InteriorIsUntextured) {
  const TriMesh& bowl = testing::bowl_mesh();
  const TextureAtlas atlas = build_atlas(bowl, {.fixed_size = 512});
  std::vector<View> views;
  for (const Camera& c : default_cameras(bowl, 256)) views.push_back(solid_view(c, {50, 60, 70, 255}));
  const TextureAtlas out = backproject(bowl, atlas, views);
  const auto missing = untextured_faces(out);
  const std::set<int> missing_set(missing.begin(), missing.end());
  EXPECT_GE(missing.size(), bowl.num_faces() / 10);
  // Inner floor: upward-facing faces well below the rim.
  const auto normals = bowl.face_normals();
  std::size_t floor_faces = 0;
  for (std::size_t f = 0; f < bowl.num_faces(); ++f) {
    const Vec3 c = bowl.face_centroid(f);
    if (normals[f].z() > 0.5 && c.z() < 0.35) {
      ++floor_faces;
      EXPECT_TRUE(missing_set.count(static_cast<int>(f))) << f;
    }
  }
  EXPECT_GT(floor_faces, 20u);
}

TEST(ExportImage, AlphaAndDilation) {
  const TriMesh tri = testing::single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  TextureAtlas atlas = build_atlas(tri, {.texel_density = 8.0});
  for (std::size_t t = 0; t < atlas.state.size(); ++t) {
    if (atlas.texel_face[t] < 0) continue;
    atlas.state[t] = TexelState::kTextured;
    for (int ch = 0; ch < 4; ++ch) atlas.image.pixels[4 * t + ch] = 100;
  }
  const Image img = export_image(atlas, 1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t t = atlas.index(x, y);
      const Rgba c = img.at(x, y);
      EXPECT_EQ(c[3], atlas.state[t] == TexelState::kTextured ? 255 : 0);
      if (atlas.state[t] == TexelState::kBackground && x + y == atlas.blocks[0].size) {
        EXPECT_EQ(c[0], 100) << x << "," << y;  // diagonal next to the face
      }
    }
  }
}

}  // namespace
}  // namespace texmesh

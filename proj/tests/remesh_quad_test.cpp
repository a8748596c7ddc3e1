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
#include "texmesh/remesh_quad.hpp"

namespace texmesh {
namespace {

constexpr double kQuarter = std::numbers::pi / 2.0;

bool monotone(const std::vector<double>& e, double slack = 1e-9) {
  for (std::size_t k = 1; k < e.size(); ++k) {
    if (e[k] > e[k - 1] + slack) return false;
  }
  return true;
}

void expect_field_invariants(const OrientationField& f) {
  for (std::size_t i = 0; i < f.dir.size(); ++i) {
    EXPECT_NEAR(f.dir[i].norm(), 1.0, 1e-6);
    EXPECT_NEAR(f.dir[i].dot(f.normal[i]), 0.0, 1e-6);
  }
}

// Distance of an angle to the nearest multiple of 90 degrees.
double quarter_residual(double a) {
  const double r = std::fmod(std::abs(a), kQuarter);
  return std::min(r, kQuarter - r);
}

TEST(Transport, RotatesAboutCommonAxis) {
  const Vec3 z = Vec3::UnitZ(), x = Vec3::UnitX(), y = Vec3::UnitY();
  EXPECT_LT((transport(y, z, x) - y).norm(), 1e-12);
  EXPECT_LT((transport(x, z, x) + z).norm(), 1e-12);
  EXPECT_LT((transport(x, z, z) - x).norm(), 1e-12);
}

TEST(Orientation, RotatedNeighbourHasZeroEnergy) {
  const Vec3 n = Vec3::UnitZ();
  const Vec3 o = Vec3(1.0, 2.0, 0.0).normalized();
  EXPECT_NEAR(rosy_angle(o, n, n.cross(o), n), 0.0, 1e-12);
  EXPECT_NEAR(rosy_angle(o, n, -o, n), 0.0, 1e-12);

  const TriMesh tri = testing::single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  OrientationField f;
  f.normal.assign(3, n);
  f.dir = {o, n.cross(o), -o};
  EXPECT_NEAR(orientation_energy(tri, f), 0.0, 1e-12);
}

TEST(Orientation, AngleMatchesPlanarOracle) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  const Vec3 n = Vec3::UnitZ();
  for (int k = 0; k < 200; ++k) {
    const double a = u(rng), b = u(rng);
    const Vec3 oa(std::cos(a), std::sin(a), 0.0), ob(std::cos(b), std::sin(b), 0.0);
    EXPECT_NEAR(rosy_angle(oa, n, ob, n), quarter_residual(a - b), 1e-9);
  }
}

TEST(Orientation, RandomInitOnPlaneBecomesConsistent) {
  const TriMesh plane = testing::plane_grid(50, 50, 1.0);
  OrientationOptions opt;
  opt.init = OrientationInit::kRandom;
  opt.seed = 7;
  opt.iterations = 50;
  FieldReport rep;
  const OrientationField f = optimize_orientation_field(plane, opt, &rep);
  EXPECT_GT(rep.initial_energy, 100.0);
  EXPECT_TRUE(monotone(rep.energy));
  expect_field_invariants(f);
  std::vector<double> angle;
  for (const Vec3& d : f.dir) angle.push_back(std::atan2(d.y(), d.x()));
  double worst = 0;
  for (std::size_t i = 0; i < angle.size(); ++i) {
    for (std::size_t j = i + 1; j < angle.size(); ++j) {
      worst = std::max(worst, quarter_residual(angle[i] - angle[j]));
    }
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Orientation, ConstantFieldIsFixedPoint) {
  const TriMesh plane = testing::plane_grid(12, 9, 0.5);
  OrientationOptions opt;
  opt.iterations = 0;
  const OrientationField start = optimize_orientation_field(plane, opt);
  opt.iterations = 20;
  FieldReport rep;
  const OrientationField f = optimize_orientation_field(plane, opt, &rep);
  for (double e : rep.energy) EXPECT_NEAR(e, 0.0, 1e-12);
  for (std::size_t i = 0; i < f.dir.size(); ++i) {
    EXPECT_LT((f.dir[i] - start.dir[i]).norm(), 1e-12);
  }
}

TEST(Orientation, MonotoneOnSphereAtEveryLevelChoice) {
  const TriMesh& sphere = testing::sphere_mesh(32);
  for (bool multilevel : {true, false}) {
    OrientationOptions opt;
    opt.init = OrientationInit::kRandom;
    opt.iterations = 30;
    opt.multilevel = multilevel;
    FieldReport rep;
    const OrientationField f = optimize_orientation_field(sphere, opt, &rep);
    ASSERT_EQ(rep.energy.size(), 31u);
    EXPECT_TRUE(monotone(rep.energy));
    EXPECT_LT(rep.energy.back(), rep.initial_energy);
    EXPECT_NEAR(rep.energy.back(), orientation_energy(sphere, f), 1e-9);
    expect_field_invariants(f);
  }
}

TEST(Orientation, IsolatedVertexIsFrozen) {
  TriMesh m = testing::single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  m.vertices.emplace_back(5.0, 5.0, 5.0);
  FieldReport rep;
  const OrientationField f = optimize_orientation_field(m, {}, &rep);
  ASSERT_EQ(rep.frozen.size(), 1u);
  EXPECT_EQ(rep.frozen[0], 3);
  expect_field_invariants(f);
}

TEST(Orientation, RejectsNegativeIterations) {
  OrientationOptions opt;
  opt.iterations = -1;
  EXPECT_THROW(optimize_orientation_field(testing::single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)), opt), InvalidArgument);
}

// Lattice coordinates of every anchor relative to anchor 0 must be integers.
double lattice_defect(const OrientationField& f, const PositionField& p) {
  const Vec3 o = f.dir[0], b = f.normal[0].cross(f.dir[0]);
  double worst = 0;
  for (const Vec3& q : p.anchor) {
    const Vec3 d = q - p.anchor[0];
    for (double c : {d.dot(o) / p.scale, d.dot(b) / p.scale}) {
      worst = std::max(worst, std::abs(c - std::round(c)));
    }
  }
  return worst;
}

TEST(Position, PlaneAnchorsShareOneLattice) {
  const TriMesh plane = testing::plane_grid(30, 30, 1.0);
  const OrientationField f = optimize_orientation_field(plane);
  const double rho = 2.5;
  FieldReport rep;
  const PositionField p = optimize_position_field(plane, f, rho, 50, &rep);
  EXPECT_TRUE(monotone(rep.energy));
  EXPECT_LT(lattice_defect(f, p), 1e-4);
  for (std::size_t i = 0; i < p.anchor.size(); ++i) {
    EXPECT_LE((p.anchor[i] - plane.vertices[i]).norm(), rho * std::sqrt(2.0) + 1e-12);
    EXPECT_NEAR(p.anchor[i].z(), 0.0, 1e-12);
  }
}

TEST(Position, SingleLevelSweepsAreMonotone) {
  const TriMesh plane = testing::plane_grid(20, 20, 1.0, true);
  const OrientationField f = optimize_orientation_field(plane);
  FieldReport rep;
  optimize_position_field(plane, f, 2.3, 100, &rep, false);
  EXPECT_TRUE(monotone(rep.energy));
  EXPECT_LT(rep.energy.back(), rep.energy.front());
}

TEST(Position, SingleVertexKeepsItsPosition) {
  TriMesh m;
  m.vertices.emplace_back(0.25, -1.0, 3.0);
  const OrientationField f = optimize_orientation_field(m);
  const PositionField p = optimize_position_field(m, f, 1.0, 10);
  ASSERT_EQ(p.anchor.size(), 1u);
  EXPECT_EQ(p.anchor[0], m.vertices[0]);
}

TEST(Position, LargeScaleCollapsesToOnePoint) {
  const TriMesh plane = testing::plane_grid(10, 10, 1.0);
  const OrientationField f = optimize_orientation_field(plane);
  const PositionField p = optimize_position_field(plane, f, 30.0, 20);
  for (const Vec3& q : p.anchor) EXPECT_LT((q - p.anchor[0]).norm(), 1e-9);
}

TEST(Position, SphereInvariants) {
  const TriMesh& sphere = testing::sphere_mesh(32);
  const OrientationField f = optimize_orientation_field(sphere);
  const double rho = 0.08;
  FieldReport rep;
  const PositionField p = optimize_position_field(sphere, f, rho, 20, &rep);
  EXPECT_TRUE(monotone(rep.energy));
  for (std::size_t i = 0; i < p.anchor.size(); ++i) {
    const Vec3 d = p.anchor[i] - sphere.vertices[i];
    EXPECT_LE(d.norm(), rho * std::sqrt(2.0) + 1e-12);
    EXPECT_NEAR(d.dot(f.normal[i]), 0.0, 1e-12);
  }
}

TEST(Position, RejectsBadScale) {
  const TriMesh tri = testing::single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  const OrientationField f = optimize_orientation_field(tri);
  EXPECT_THROW(optimize_position_field(tri, f, 0.0, 5), InvalidArgument);
  EXPECT_THROW(optimize_position_field(tri, f, -1.0, 5), InvalidArgument);
  OrientationField wrong = f;
  wrong.dir.pop_back();
  EXPECT_THROW(optimize_position_field(tri, wrong, 1.0, 5), InvalidArgument);
}

TEST(ExtractQuads, PlaneGivesRegularQuads) {
  const TriMesh plane = testing::plane_grid(40, 40, 1.0, true);
  const OrientationField f = optimize_orientation_field(plane);
  const double rho = 2.5;
  const PositionField p = optimize_position_field(plane, f, rho, 30);
  QuadReport rep;
  const QuadDominantMesh q = extract_quads(plane, f, p, &rep);
  EXPECT_EQ(q.num_interior_triangles(), 0u);
  EXPECT_GT(q.num_quads(), 0u);
  EXPECT_EQ(rep.quads, q.num_quads());
  const double expected = surface_area(plane) / (rho * rho);
  EXPECT_GE(q.faces.size(), 0.5 * expected);
  EXPECT_LE(q.faces.size(), 2.0 * expected);
  for (const auto& face : q.faces) {
    if (face.size() != 4) continue;
    Vec3 area = Vec3::Zero();
    for (std::size_t k = 0; k < 4; ++k) {
      const Vec3& a = q.vertices[face[k]];
      const Vec3& b = q.vertices[face[(k + 1) % 4]];
      EXPECT_NEAR((a - b).norm(), rho, 1e-6);
      area += a.cross(b);
    }
    EXPECT_NEAR(0.5 * area.z(), rho * rho, 1e-6);
  }
  for (int v : rep.irregular) EXPECT_TRUE(q.boundary[v]) << v;
}

TEST(ExtractQuads, SphereFaceCountTracksScale) {
  const TriMesh& sphere = testing::sphere_mesh(48);
  const OrientationField f = optimize_orientation_field(sphere);
  for (double rho : {0.05, 0.1}) {
    const PositionField p = optimize_position_field(sphere, f, rho, 20);
    QuadReport rep;
    const QuadDominantMesh q = extract_quads(sphere, f, p, &rep);
    const double expected = surface_area(sphere) / (rho * rho);
    EXPECT_GE(q.faces.size(), 0.5 * expected);
    EXPECT_LE(q.faces.size(), 2.0 * expected);
    EXPECT_GT(q.num_quads(), q.num_triangles());
    for (const auto& fc : q.faces) {
      EXPECT_EQ(std::set<int>(fc.begin(), fc.end()).size(), fc.size());
    }
    EXPECT_NE(rep.to_text().find("quads " + std::to_string(rep.quads)), std::string::npos);
    EXPECT_EQ(triangulate(q).num_faces(), 2 * q.num_quads() + q.num_triangles() +
                                              [&] {
                                                std::size_t extra = 0;
                                                for (const auto& fc : q.faces)
                                                  if (fc.size() > 4) extra += fc.size() - 2;
                                                return extra;
                                              }());
  }
}

TEST(ExtractQuads, ScrambledAnchorsDoNotThrow) {
  const TriMesh plane = testing::plane_grid(15, 15, 1.0);
  const OrientationField f = optimize_orientation_field(plane);
  PositionField p;
  p.scale = 2.0;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (const Vec3& v : plane.vertices) p.anchor.push_back(v + Vec3(u(rng), u(rng), 0.0));
  QuadReport rep;
  QuadDominantMesh q;
  EXPECT_NO_THROW(q = extract_quads(plane, f, p, &rep));
  EXPECT_GT(rep.inconsistent_links + rep.irregular.size(), 0u);
  for (const auto& face : q.faces) {
    for (int v : face) EXPECT_LT(static_cast<std::size_t>(v), q.vertices.size());
    EXPECT_EQ(std::set<int>(face.begin(), face.end()).size(), face.size());
  }
}

}  // namespace
}  // namespace texmesh

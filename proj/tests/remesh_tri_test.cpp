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
#include "texmesh/remesh_tri.hpp"

namespace texmesh {
namespace {

double max_edge(const TriMesh& m) {
  double worst = 0;
  const EdgeTable table(m);
  for (const Edge& e : table.edges()) {
    worst = std::max(worst, (m.vertices[e.v0] - m.vertices[e.v1]).norm());
  }
  return worst;
}

// Hexagonal fan around vertex 0 with optional centre offset.
TriMesh hex_fan(const Vec3& center) {
  TriMesh m;
  m.vertices.push_back(center);
  for (int k = 0; k < 6; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    m.vertices.emplace_back(std::cos(a), std::sin(a), 0.0);
  }
  for (int k = 0; k < 6; ++k) m.faces.push_back({0, 1 + k, 1 + (k + 1) % 6});
  return m;
}

long valence_deviation(const TriMesh& m) {
  const auto val = vertex_valences(m);
  const auto bnd = boundary_vertices(m);
  long s = 0;
  for (std::size_t v = 0; v < val.size(); ++v) {
    const long d = val[v] - (bnd[v] ? 4 : 6);
    s += d * d;
  }
  return s;
}

std::set<std::array<int, 3>> canonical_faces(const TriMesh& m) {
  std::set<std::array<int, 3>> out;
  for (Face f : m.faces) {
    while (f[0] != std::min({f[0], f[1], f[2]})) f = {f[1], f[2], f[0]};
    out.insert(f);
  }
  return out;
}

TEST(RemeshParams, Validation) {
  RemeshParams p;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.target_edge_length = 0.1;
  EXPECT_NO_THROW(p.validate());
  p.damping = 1.5;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.damping = 0.5;
  p.collapse_factor = 1.2;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(SplitLongEdges, SharedEdgeSplitUntilShort) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 0.3, 0), Vec3(0.5, -0.3, 0)};
  m.faces = {{0, 1, 2}, {1, 0, 3}};
  const TriMesh out = split_long_edges(m, 0.4);
  EXPECT_LE(max_edge(out), 0.4);
  EXPECT_EQ(EdgeTable(out).nonmanifold_edge_count(), 0u);
  EXPECT_NEAR(surface_area(out), surface_area(m), 1e-12);
}

TEST(SplitLongEdges, ShortEdgesAreIdentity) {
  const TriMesh m = testing::plane_grid(4, 4, 0.1);
  const TriMesh out = split_long_edges(m, 0.5);
  EXPECT_EQ(out.faces, m.faces);
  EXPECT_EQ(out.vertices, m.vertices);
}

TEST(SplitLongEdges, EquilateralTriangleBoundarySplitOnce) {
  const TriMesh m = testing::single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0),
                                             Vec3(0.5, std::sqrt(3.0) / 2.0, 0));
  const TriMesh out = split_long_edges(m, 0.6);
  const EdgeTable edges(out);
  std::size_t boundary = 0;
  for (const Edge& e : edges.edges()) {
    if (e.faces.size() != 1) continue;
    ++boundary;
    EXPECT_NEAR((out.vertices[e.v0] - out.vertices[e.v1]).norm(), 0.5, 1e-12);
  }
  EXPECT_EQ(boundary, 6u);
  EXPECT_LE(max_edge(out), 0.6);
  EXPECT_GE(out.num_faces(), 4u);
  EXPECT_NEAR(surface_area(out), surface_area(m), 1e-12);
}

TEST(CollapseShortEdges, RemovesShortEdge) {
  TriMesh m = testing::plane_grid(5, 5, 1.0);
  // Pull vertex 12 (the centre) close to vertex 13.
  m.vertices[12] = Vec3(2.95, 2.0, 0.0);
  const TriMesh out = collapse_short_edges(m, 0.2, 10.0);
  EXPECT_EQ(out.num_vertices(), m.num_vertices() - 1);
  EXPECT_EQ(out.num_faces(), m.num_faces() - 2);
  EXPECT_EQ(EdgeTable(out).nonmanifold_edge_count(), 0u);
}

TEST(CollapseShortEdges, BlockedByMaxEdgeLength) {
  TriMesh m = testing::plane_grid(5, 5, 1.0);
  m.vertices[12] = Vec3(2.95, 2.0, 0.0);
  const TriMesh out = collapse_short_edges(m, 0.2, 1.2);
  EXPECT_EQ(out.num_vertices(), m.num_vertices());
}

TEST(CollapseShortEdges, TetrahedronViolatesLinkCondition) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(0.01, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  const TriMesh out = collapse_short_edges(m, 0.1, 10.0);
  EXPECT_EQ(out.faces, m.faces);
}

TEST(CollapseShortEdges, NeverFoldsPlanarFaces) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 8; ++trial) {
    TriMesh m = testing::plane_grid(12, 12, 1.0, trial % 2 == 0);
    for (Vec3& v : m.vertices) v += Vec3(u(rng), u(rng), 0.0);
    for (std::size_t f = 0; f < m.num_faces(); ++f) ASSERT_GT(m.face_cross(f).z(), 0.0);
    const TriMesh out = collapse_short_edges(m, 0.9, 2.5);
    EXPECT_LT(out.num_vertices(), m.num_vertices());
    for (std::size_t f = 0; f < out.num_faces(); ++f) {
      EXPECT_GT(out.face_cross(f).z(), 0.0);
    }
    EXPECT_EQ(EdgeTable(out).nonmanifold_edge_count(), 0u);
  }
}

TEST(EqualizeValences, FlipsBackDisplacedDiagonal) {
  const TriMesh lattice = testing::plane_grid(9, 9, 1.0);
  // Flip the interior diagonal 40-50: (40,41,50) and (40,50,49).
  TriMesh m = lattice;
  const int a = 40, b = 50;
  std::vector<int> shared;
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    const Face& t = m.faces[f];
    if (std::count(t.begin(), t.end(), a) && std::count(t.begin(), t.end(), b)) {
      shared.push_back(static_cast<int>(f));
    }
  }
  ASSERT_EQ(shared.size(), 2u);
  m.faces[shared[0]] = {40, 41, 49};
  m.faces[shared[1]] = {41, 50, 49};
  const auto val = vertex_valences(m);
  // Quad 40-41-50-49 now split along 41-49 with valences 7,7 on the diagonal
  // and 5,5 on the other corners.
  EXPECT_EQ(val[41], 7);
  EXPECT_EQ(val[49], 7);
  EXPECT_EQ(val[40], 5);
  EXPECT_EQ(val[50], 5);
  auto sq = [](int x) { return x * x; };
  EXPECT_EQ(sq(7 - 6) + sq(7 - 6) + sq(5 - 6) + sq(5 - 6), 4);
  EXPECT_EQ(sq(6 - 6) * 4, 0);

  FlipStats stats;
  const TriMesh out = equalize_valences(m, &stats);
  EXPECT_EQ(stats.flips, 1u);
  EXPECT_EQ(stats.deviation_before - stats.deviation_after, 4);
  EXPECT_EQ(canonical_faces(out), canonical_faces(lattice));
}

TEST(EqualizeValences, RegularPatchIsFixedPoint) {
  const TriMesh m = testing::plane_grid(9, 9, 1.0);
  FlipStats stats;
  const TriMesh out = equalize_valences(m, &stats);
  EXPECT_EQ(stats.flips, 0u);
  EXPECT_EQ(out.faces, m.faces);
}

TEST(EqualizeValences, BoundaryEdgesNeverFlipped) {
  // A fan where only boundary edges touch high-valence vertices.
  const TriMesh m = hex_fan(Vec3::Zero());
  const TriMesh out = equalize_valences(m);
  const EdgeTable before(m), after(out);
  for (const Edge& e : before.edges()) {
    if (e.faces.size() == 1) EXPECT_GE(after.find(e.v0, e.v1), 0);
  }
}

TEST(EqualizeValences, NeverIncreasesDeviation) {
  std::mt19937 rng(5);
  std::normal_distribution<double> jitter(0.0, 0.15);
  for (int trial = 0; trial < 10; ++trial) {
    TriMesh m = testing::plane_grid(10, 10, 1.0, trial % 2 == 1);
    for (Vec3& v : m.vertices) v += Vec3(jitter(rng), jitter(rng), 0.0);
    const TriMesh out = equalize_valences(m);
    EXPECT_LE(valence_deviation(out), valence_deviation(m));
    EXPECT_EQ(EdgeTable(out).nonmanifold_edge_count(), 0u);
  }
  const TriMesh& s = testing::sphere_mesh(32);
  EXPECT_LE(valence_deviation(equalize_valences(s)), valence_deviation(s));
}

TEST(TangentialSmooth, SymmetricFanDoesNotMove) {
  TriMesh m = hex_fan(Vec3::Zero());
  // Close the fan into a cone so vertex 0 is the only smoothed vertex... the
  // rim is boundary, so only the centre moves.
  SmoothStats stats;
  const TriMesh out = tangential_smooth(m, 0.5, &stats);
  EXPECT_LT(stats.displacement[0].norm(), 1e-15);
  for (std::size_t v = 1; v < m.num_vertices(); ++v) EXPECT_EQ(out.vertices[v], m.vertices[v]);
}

TEST(TangentialSmooth, InPlaneDisplacementIsDampedCentroidStep) {
  const double lambda = 0.3;
  const Vec3 d(0.1, -0.05, 0.0);
  TriMesh m = hex_fan(d);
  // Barycentric areas of the rim vertices, evaluated by hand from the formula.
  std::vector<double> area(m.num_vertices(), 0.0);
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    for (int v : m.faces[f]) area[v] += m.face_area(f) / 3.0;
  }
  Vec3 g = Vec3::Zero();
  double total = 0;
  for (int j = 1; j <= 6; ++j) {
    g += area[j] * m.vertices[j];
    total += area[j];
  }
  g /= total;
  SmoothStats stats;
  const TriMesh out = tangential_smooth(m, lambda, &stats);
  const Vec3 expected = lambda * (g - d);
  EXPECT_NEAR((out.vertices[0] - d - expected).norm(), 0.0, 1e-15);
}

TEST(TangentialSmooth, NormalOffsetIsAnnihilated) {
  // Raised apex: g - p is parallel to the vertex normal.
  const TriMesh m = hex_fan(Vec3(0, 0, 0.4));
  SmoothStats stats;
  tangential_smooth(m, 1.0, &stats);
  EXPECT_LT(stats.displacement[0].norm(), 1e-15);
}

TEST(TangentialSmooth, IsolatedVertexAndBoundaryStay) {
  TriMesh m = hex_fan(Vec3(0.2, 0.1, 0.0));
  m.vertices.emplace_back(5, 5, 5);
  const TriMesh out = tangential_smooth(m, 1.0);
  EXPECT_EQ(out.vertices.back(), m.vertices.back());
  EXPECT_EQ(out.vertices[3], m.vertices[3]);
}

TEST(TangentialSmooth, DisplacementIsTangentOnSphere) {
  const TriMesh& s = testing::sphere_mesh(48);
  for (VertexAreaKind kind : {VertexAreaKind::kBarycentric, VertexAreaKind::kVoronoi}) {
    SmoothStats stats;
    tangential_smooth(s, 0.5, &stats, kind);
    EXPECT_LT(stats.max_relative_normal_component, 1e-9);
    for (std::size_t v = 0; v < s.num_vertices(); ++v) {
      ASSERT_LT(std::abs(stats.displacement[v].dot(stats.normal[v])), 1e-9);
    }
  }
}

TEST(IsotropicRemesh, SphereQuality) {
  const TriMesh& s = testing::sphere_mesh(64);
  RemeshParams p;
  p.target_edge_length = 0.03;
  p.iterations = 5;
  RemeshReport report;
  const TriMesh out = isotropic_remesh(s, p, &report);
  ASSERT_EQ(report.rounds.size(), 5u);
  const EdgeTable edges(out);
  EXPECT_TRUE(edges.is_closed_manifold());
  EXPECT_EQ(euler_characteristic(out, edges), 2);
  std::size_t in_band = 0;
  for (const Edge& e : edges.edges()) {
    const double len = (out.vertices[e.v0] - out.vertices[e.v1]).norm();
    in_band += (len >= 0.8 * 0.03 && len <= 4.0 / 3.0 * 0.03) ? 1 : 0;
  }
  const double fraction = static_cast<double>(in_band) / static_cast<double>(edges.edges().size());
  EXPECT_GE(fraction, 0.9);
  EXPECT_GE(report.rounds.back().mean_valence, 5.8);
  EXPECT_LE(report.rounds.back().mean_valence, 6.2);
  const double v0 = enclosed_volume(s);
  EXPECT_LT(std::abs(enclosed_volume(out) - v0) / v0, 0.02);
  for (const auto& r : report.rounds) EXPECT_LT(r.max_tangent_residual, 1e-9);
  const std::string csv = report.to_csv();
  EXPECT_EQ(csv.rfind("round,edges,mean_edge,mean_valence,volume\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(IsotropicRemesh, OpenPatchStaysManifold) {
  TriMesh m = testing::plane_grid(12, 12, 0.1);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-0.03, 0.03);
  for (Vec3& v : m.vertices) v.z() = u(rng);
  RemeshParams p;
  p.target_edge_length = 0.07;
  p.iterations = 3;
  const TriMesh out = isotropic_remesh(m, p);
  EXPECT_EQ(EdgeTable(out).nonmanifold_edge_count(), 0u);
  out.validate();
}

}  // namespace
}  // namespace texmesh

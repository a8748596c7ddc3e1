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

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "texmesh/common.hpp"

namespace texmesh {

// Binary occupancy defined by a CSG tree of primitives. Used as ground truth
// in place of a learned occupancy decoder. Nodes are immutable and shared.
class AnalyticField {
 public:
  enum class Kind { kSphere, kBox, kTorus, kUnion, kDifference };

  static AnalyticField sphere(const Vec3& center, double radius);
  static AnalyticField box(const Vec3& center, const Vec3& half_extents);
  // Torus around the z axis through `center`.
  static AnalyticField torus(const Vec3& center, double major_radius,
                             double minor_radius);
  static AnalyticField make_union(std::vector<AnalyticField> parts);
  static AnalyticField difference(AnalyticField a, AnalyticField b);

  // Parses expressions like "difference(sphere(0.5,0.5,0.5,0.4),
  // box(0.5,0.5,0.75,0.5,0.5,0.25))". Throws ParseError.
  static AnalyticField parse(const std::string& expr);

  // 1 inside, 0 outside. Points exactly on the boundary count as inside.
  double occupancy(const Vec3& p) const;

  Kind kind() const { return node_->kind; }
  std::string to_string() const;

 private:
  struct Node {
    Kind kind;
    Vec3 center = Vec3::Zero();
    Vec3 extents = Vec3::Zero();  // radius / half extents / (R, r, 0)
    std::vector<std::shared_ptr<const Node>> children;
  };
  explicit AnalyticField(std::shared_ptr<const Node> node)
      : node_(std::move(node)) {}
  static double eval(const Node& node, const Vec3& p);
  static std::string print(const Node& node);

  std::shared_ptr<const Node> node_;
};

// Regular lattice of occupancy samples, x-fastest.
class GridField {
 public:
  GridField(std::array<int, 3> dims, const Vec3& origin, double spacing,
            std::vector<float> values);

  const std::array<int, 3>& dims() const { return dims_; }
  const Vec3& origin() const { return origin_; }
  double spacing() const { return spacing_; }
  const std::vector<float>& values() const { return values_; }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(k));
  }
  float at(int i, int j, int k) const { return values_[index(i, j, k)]; }
  Vec3 point(int i, int j, int k) const {
    return origin_ + spacing_ * Vec3(i, j, k);
  }
  Vec3 max_corner() const { return point(dims_[0] - 1, dims_[1] - 1, dims_[2] - 1); }

  // Trilinear interpolation. Throws OutOfRange outside the lattice bounds.
  double query(const Vec3& p) const;

 private:
  std::array<int, 3> dims_;
  Vec3 origin_;
  double spacing_;
  std::vector<float> values_;
};

GridField sample_grid(const AnalyticField& field, std::array<int, 3> dims,
                      const Vec3& origin, double spacing);

inline double query(const AnalyticField& field, const Vec3& p) {
  return field.occupancy(p);
}
inline double query(const GridField& field, const Vec3& p) {
  return field.query(p);
}

}  // namespace texmesh

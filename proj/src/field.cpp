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

#include "texmesh/field.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace texmesh {

AnalyticField AnalyticField::sphere(const Vec3& center, double radius) {
  if (!(radius > 0)) throw InvalidArgument("sphere radius must be positive");
  auto node = std::make_shared<Node>();
  node->kind = Kind::kSphere;
  node->center = center;
  node->extents = Vec3(radius, 0, 0);
  return AnalyticField(node);
}

AnalyticField AnalyticField::box(const Vec3& center, const Vec3& half_extents) {
  if (!(half_extents.minCoeff() > 0)) {
    throw InvalidArgument("box half extents must be positive");
  }
  auto node = std::make_shared<Node>();
  node->kind = Kind::kBox;
  node->center = center;
  node->extents = half_extents;
  return AnalyticField(node);
}

AnalyticField AnalyticField::torus(const Vec3& center, double major_radius,
                                   double minor_radius) {
  if (!(major_radius > 0) || !(minor_radius > 0)) {
    throw InvalidArgument("torus radii must be positive");
  }
  auto node = std::make_shared<Node>();
  node->kind = Kind::kTorus;
  node->center = center;
  node->extents = Vec3(major_radius, minor_radius, 0);
  return AnalyticField(node);
}

AnalyticField AnalyticField::make_union(std::vector<AnalyticField> parts) {
  if (parts.empty()) throw InvalidArgument("union needs at least one part");
  auto node = std::make_shared<Node>();
  node->kind = Kind::kUnion;
  for (auto& p : parts) node->children.push_back(std::move(p.node_));
  return AnalyticField(node);
}

AnalyticField AnalyticField::difference(AnalyticField a, AnalyticField b) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kDifference;
  node->children = {std::move(a.node_), std::move(b.node_)};
  return AnalyticField(node);
}

double AnalyticField::occupancy(const Vec3& p) const { return eval(*node_, p); }

double AnalyticField::eval(const Node& node, const Vec3& p) {
  switch (node.kind) {
    case Kind::kSphere:
      return (p - node.center).squaredNorm() <= node.extents.x() * node.extents.x()
                 ? 1.0
                 : 0.0;
    case Kind::kBox: {
      const Vec3 d = (p - node.center).cwiseAbs();
      return (d.array() <= node.extents.array()).all() ? 1.0 : 0.0;
    }
    case Kind::kTorus: {
      const Vec3 d = p - node.center;
      const double ring = std::hypot(d.x(), d.y()) - node.extents.x();
      return ring * ring + d.z() * d.z() <= node.extents.y() * node.extents.y()
                 ? 1.0
                 : 0.0;
    }
    case Kind::kUnion:
      for (const auto& c : node.children) {
        if (eval(*c, p) > 0.5) return 1.0;
      }
      return 0.0;
    case Kind::kDifference:
      return (eval(*node.children[0], p) > 0.5 && eval(*node.children[1], p) <= 0.5)
                 ? 1.0
                 : 0.0;
  }
  return 0.0;
}

std::string AnalyticField::to_string() const { return print(*node_); }

std::string AnalyticField::print(const Node& node) {
  std::ostringstream os;
  os.precision(17);
  const Vec3& c = node.center;
  const Vec3& e = node.extents;
  switch (node.kind) {
    case Kind::kSphere:
      os << "sphere(" << c.x() << "," << c.y() << "," << c.z() << "," << e.x() << ")";
      break;
    case Kind::kBox:
      os << "box(" << c.x() << "," << c.y() << "," << c.z() << "," << e.x() << ","
         << e.y() << "," << e.z() << ")";
      break;
    case Kind::kTorus:
      os << "torus(" << c.x() << "," << c.y() << "," << c.z() << "," << e.x() << ","
         << e.y() << ")";
      break;
    case Kind::kUnion:
    case Kind::kDifference:
      os << (node.kind == Kind::kUnion ? "union(" : "difference(");
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) os << ",";
        os << print(*node.children[i]);
      }
      os << ")";
      break;
  }
  return os.str();
}

namespace {

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  AnalyticField parse_all() {
    AnalyticField f = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("shape expression: " + what + " at column " +
                         std::to_string(pos_ + 1),
                     1);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) ||
                                s_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected shape name");
    return s_.substr(start, pos_ - start);
  }

  double number() {
    skip_ws();
    double v = 0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) fail("expected number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  std::vector<double> numbers(std::size_t count) {
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) {
      if (i) expect(',');
      out.push_back(number());
    }
    return out;
  }

  AnalyticField parse_expr() {
    const std::string name = ident();
    expect('(');
    AnalyticField result = [&]() -> AnalyticField {
      try {
        if (name == "sphere") {
          auto v = numbers(4);
          return AnalyticField::sphere(Vec3(v[0], v[1], v[2]), v[3]);
        }
        if (name == "box") {
          auto v = numbers(6);
          return AnalyticField::box(Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]));
        }
        if (name == "torus") {
          auto v = numbers(5);
          return AnalyticField::torus(Vec3(v[0], v[1], v[2]), v[3], v[4]);
        }
      } catch (const InvalidArgument& e) {
        fail(e.what());
      }
      if (name == "union") {
        std::vector<AnalyticField> parts{parse_expr()};
        while (accept(',')) parts.push_back(parse_expr());
        return AnalyticField::make_union(std::move(parts));
      }
      if (name == "difference") {
        AnalyticField a = parse_expr();
        expect(',');
        AnalyticField b = parse_expr();
        return AnalyticField::difference(std::move(a), std::move(b));
      }
      fail("unknown shape '" + name + "'");
    }();
    expect(')');
    return result;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

AnalyticField AnalyticField::parse(const std::string& expr) {
  return ExprParser(expr).parse_all();
}

GridField::GridField(std::array<int, 3> dims, const Vec3& origin, double spacing,
                     std::vector<float> values)
    : dims_(dims), origin_(origin), spacing_(spacing), values_(std::move(values)) {
  for (int d : dims_) {
    if (d < 1) throw InvalidArgument("grid dims must be positive");
  }
  if (!(spacing_ > 0) || !std::isfinite(spacing_)) {
    throw InvalidArgument("grid spacing must be positive");
  }
  const std::size_t n = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  if (values_.size() != n) {
    throw InvalidArgument("grid has " + std::to_string(values_.size()) +
                          " values, expected " + std::to_string(n));
  }
  for (float v : values_) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw InvalidArgument("grid values must be finite and in [0,1]");
    }
  }
}

double GridField::query(const Vec3& p) const {
  const Vec3 g = (p - origin_) / spacing_;
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const double hi = dims_[a] - 1;
    // Tolerate round-off right at the faces of the lattice.
    const double slack = 1e-9 * std::max(1.0, hi);
    if (!(g[a] >= -slack && g[a] <= hi + slack)) {
      throw OutOfRange("grid query outside lattice bounds");
    }
    double c = std::clamp(g[a], 0.0, hi);
    // Snap round-off so lattice points reproduce stored values exactly.
    if (std::abs(c - std::round(c)) < 1e-9) c = std::round(c);
    int b = static_cast<int>(std::floor(c));
    if (b >= dims_[a] - 1) b = std::max(0, dims_[a] - 2);
    base[a] = b;
    frac[a] = dims_[a] == 1 ? 0.0 : c - b;
  }
  const int i1 = std::min(base[0] + 1, dims_[0] - 1);
  const int j1 = std::min(base[1] + 1, dims_[1] - 1);
  const int k1 = std::min(base[2] + 1, dims_[2] - 1);
  const int i0 = base[0], j0 = base[1], k0 = base[2];
  const double fx = frac[0], fy = frac[1], fz = frac[2];
  const double c00 = at(i0, j0, k0) * (1 - fx) + at(i1, j0, k0) * fx;
  const double c10 = at(i0, j1, k0) * (1 - fx) + at(i1, j1, k0) * fx;
  const double c01 = at(i0, j0, k1) * (1 - fx) + at(i1, j0, k1) * fx;
  const double c11 = at(i0, j1, k1) * (1 - fx) + at(i1, j1, k1) * fx;
  const double c0 = c00 * (1 - fy) + c10 * fy;
  const double c1 = c01 * (1 - fy) + c11 * fy;
  return c0 * (1 - fz) + c1 * fz;
}

GridField sample_grid(const AnalyticField& field, std::array<int, 3> dims,
                      const Vec3& origin, double spacing) {
  for (int d : dims) {
    if (d < 2) throw InvalidArgument("sample_grid needs at least 2 samples per axis");
  }
  if (!(spacing > 0) || !std::isfinite(spacing)) {
    throw InvalidArgument("sample_grid spacing must be positive");
  }
  const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  std::vector<float> values(n);
  const std::size_t slab = static_cast<std::size_t>(dims[0]) * dims[1];
  parallel_for(static_cast<std::size_t>(dims[2]), [&](std::size_t k0, std::size_t k1) {
    for (std::size_t k = k0; k < k1; ++k) {
      for (int j = 0; j < dims[1]; ++j) {
        for (int i = 0; i < dims[0]; ++i) {
          const Vec3 p = origin + spacing * Vec3(i, j, static_cast<double>(k));
          values[k * slab + static_cast<std::size_t>(j) * dims[0] + i] =
              static_cast<float>(field.occupancy(p));
        }
      }
    }
  });
  return GridField(dims, origin, spacing, std::move(values));
}

}  // namespace texmesh

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

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "texmesh/common.hpp"

namespace texmesh {

// Dense C x H x W activations, channel-major: data[(c * height + y) * width + x].
struct FeatureTensor {
  int channels = 0;
  int width = 0;
  int height = 0;
  std::vector<double> data;

  FeatureTensor() = default;
  FeatureTensor(int channels, int width, int height, double fill = 0.0);

  double& at(int c, int x, int y) { return data[offset(c, x, y)]; }
  double at(int c, int x, int y) const { return data[offset(c, x, y)]; }
  std::size_t offset(int c, int x, int y) const {
    return (static_cast<std::size_t>(c) * height + y) * width + x;
  }
  std::size_t plane() const { return static_cast<std::size_t>(width) * height; }

  // Throws InvalidArgument on odd channel count or non-finite values.
  void validate() const;

  bool operator==(const FeatureTensor&) const = default;
};

// Tokens are rows: F x (C/2).
struct GuidanceView {
  Eigen::MatrixXd positive;
  Eigen::MatrixXd negative;
};

struct GuidanceSet {
  std::vector<GuidanceView> views;

  int num_views() const { return static_cast<int>(views.size()); }
  int tokens() const;
  int dim() const;
  void validate() const;
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool contains(int px, int py) const {
    return px >= x && py >= y && px < x + width && py < y + height;
  }
  bool operator==(const Rect&) const = default;
};

struct RegionLayout {
  int width = 0;
  int height = 0;
  std::vector<Rect> regions;  // one per view

  int num_views() const { return static_cast<int>(regions.size()); }
  // Throws InvalidArgument unless the rectangles tile the canvas exactly.
  void validate() const;
  // Index of the rectangle covering (x, y), or -1.
  int region_at(int x, int y) const;
};

// View i sits in column i / 2, row i % 2 of a 2 x ceil(N/2) grid; an unpaired
// last view spans the full height of its column. N = 1 is the whole canvas.
RegionLayout default_layout(int views, int width, int height);

struct AttentionWeights {
  Eigen::MatrixXd query;
  Eigen::MatrixXd key;
  Eigen::MatrixXd value;

  int dim() const { return static_cast<int>(query.rows()); }
  void validate() const;

  // Entries uniform in [-1, 1] / sqrt(dim).
  static AttentionWeights random(int dim, std::uint64_t seed);
  static AttentionWeights identity(int dim);
};

// [h_f x N | h_b x N]
FeatureTensor replicate_hidden(const FeatureTensor& h, int views);

// CN x F, rows laid out like replicate_hidden.
Eigen::MatrixXd assemble_guidance(const GuidanceSet& guidance);

// softmax(Q K^T / sqrt(d)) V with Q = tokens W_q, K = context W_k,
// V = context W_v; tokens are rows. `attention` receives the softmax matrix.
Eigen::MatrixXd cross_attention(const Eigen::MatrixXd& tokens, const Eigen::MatrixXd& context,
                                const AttentionWeights& weights,
                                Eigen::MatrixXd* attention = nullptr);

// Attends each of the 2N channel groups of `hidden` to the matching guidance
// rows. `attention`, if given, receives the 2N (W*H) x F softmax maps.
FeatureTensor decoupled_cross_attention(const FeatureTensor& hidden,
                                        const Eigen::MatrixXd& guidance,
                                        const AttentionWeights& weights,
                                        std::vector<Eigen::MatrixXd>* attention = nullptr);

FeatureTensor aggregate_regions(const FeatureTensor& z, const RegionLayout& layout);

FeatureTensor decoupled_pass(const FeatureTensor& h, const GuidanceSet& guidance,
                             const RegionLayout& layout, const AttentionWeights& weights,
                             std::vector<Eigen::MatrixXd>* attention = nullptr);

}  // namespace texmesh

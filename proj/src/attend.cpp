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

#include "texmesh/attend.hpp"

#include <cmath>
#include <random>
#include <string>

namespace texmesh {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

// Pixels become rows.
Eigen::MatrixXd group_tokens(const FeatureTensor& t, int first, int dim) {
  const std::size_t n = t.plane();
  Eigen::MatrixXd tokens(static_cast<Eigen::Index>(n), dim);
  for (int c = 0; c < dim; ++c) {
    const double* src = t.data.data() + static_cast<std::size_t>(first + c) * n;
    for (std::size_t p = 0; p < n; ++p) tokens(static_cast<Eigen::Index>(p), c) = src[p];
  }
  return tokens;
}

}  // namespace

FeatureTensor::FeatureTensor(int c, int w, int h, double fill)
    : channels(c), width(w), height(h) {
  require(c >= 0 && w >= 0 && h >= 0, "negative tensor dimension");
  data.assign(static_cast<std::size_t>(c) * w * h, fill);
}

void FeatureTensor::validate() const {
  require(channels > 0 && width > 0 && height > 0, "empty feature tensor");
  require(channels % 2 == 0, "feature channels must be even, got " + std::to_string(channels));
  require(data.size() == static_cast<std::size_t>(channels) * width * height,
          "feature tensor data size mismatch");
  for (double v : data) require(std::isfinite(v), "non-finite feature value");
}

int GuidanceSet::tokens() const {
  return views.empty() ? 0 : static_cast<int>(views[0].positive.rows());
}

int GuidanceSet::dim() const {
  return views.empty() ? 0 : static_cast<int>(views[0].positive.cols());
}

void GuidanceSet::validate() const {
  require(!views.empty(), "guidance needs at least one view");
  const int f = tokens(), d = dim();
  require(f > 0 && d > 0, "empty guidance tokens");
  for (std::size_t i = 0; i < views.size(); ++i) {
    const GuidanceView& v = views[i];
    require(v.positive.rows() == f && v.positive.cols() == d && v.negative.rows() == f &&
                v.negative.cols() == d,
            "guidance view " + std::to_string(i) + " shape differs from view 0");
    require(finite(v.positive) && finite(v.negative), "non-finite guidance value");
  }
}

void RegionLayout::validate() const {
  require(width > 0 && height > 0, "empty layout canvas");
  require(!regions.empty(), "layout has no regions");
  std::vector<int> owner(static_cast<std::size_t>(width) * height, -1);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Rect& r = regions[i];
    require(r.width > 0 && r.height > 0 && r.x >= 0 && r.y >= 0 && r.x + r.width <= width &&
                r.y + r.height <= height,
            "region " + std::to_string(i) + " is empty or outside the canvas");
    for (int y = r.y; y < r.y + r.height; ++y) {
      for (int x = r.x; x < r.x + r.width; ++x) {
        int& o = owner[static_cast<std::size_t>(y) * width + x];
        require(o < 0, "regions " + std::to_string(o) + " and " + std::to_string(i) + " overlap");
        o = static_cast<int>(i);
      }
    }
  }
  for (int o : owner) require(o >= 0, "regions do not cover the canvas");
}

int RegionLayout::region_at(int x, int y) const {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].contains(x, y)) return static_cast<int>(i);
  }
  return -1;
}

RegionLayout default_layout(int views, int width, int height) {
  require(views > 0, "layout needs at least one view");
  RegionLayout layout{width, height, {}};
  if (views == 1) {
    layout.regions.push_back({0, 0, width, height});
  } else {
    const int columns = (views + 1) / 2;
    require(width >= columns && height >= 2, "canvas too small for " + std::to_string(views) +
                                                 " regions");
    const int mid = height / 2;
    for (int i = 0; i < views; ++i) {
      const int col = i / 2;
      const int x0 = col * width / columns, x1 = (col + 1) * width / columns;
      if (i % 2 == 0 && i + 1 == views) {
        layout.regions.push_back({x0, 0, x1 - x0, height});
      } else if (i % 2 == 0) {
        layout.regions.push_back({x0, 0, x1 - x0, mid});
      } else {
        layout.regions.push_back({x0, mid, x1 - x0, height - mid});
      }
    }
  }
  layout.validate();
  return layout;
}

void AttentionWeights::validate() const {
  const Eigen::Index d = query.rows();
  require(d > 0, "empty attention weights");
  for (const Eigen::MatrixXd* m : {&query, &key, &value}) {
    require(m->rows() == d && m->cols() == d, "attention weights must be square and equal-sized");
    require(finite(*m), "non-finite attention weight");
  }
}

AttentionWeights AttentionWeights::random(int dim, std::uint64_t seed) {
  require(dim > 0, "attention dimension must be positive");
  std::mt19937_64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  auto fill = [&] {
    Eigen::MatrixXd m(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        m(r, c) = (2.0 * u - 1.0) * scale;
      }
    }
    return m;
  };
  AttentionWeights w;
  w.query = fill();
  w.key = fill();
  w.value = fill();
  return w;
}

AttentionWeights AttentionWeights::identity(int dim) {
  require(dim > 0, "attention dimension must be positive");
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
  return {id, id, id};
}

FeatureTensor replicate_hidden(const FeatureTensor& h, int views) {
  h.validate();
  require(views > 0, "replication needs at least one view");
  const int half = h.channels / 2;
  const std::size_t block = static_cast<std::size_t>(half) * h.plane();
  FeatureTensor out(h.channels * views, h.width, h.height);
  for (int side = 0; side < 2; ++side) {
    const auto src = h.data.begin() + static_cast<std::ptrdiff_t>(side * block);
    for (int i = 0; i < views; ++i) {
      const std::size_t dst = (static_cast<std::size_t>(side) * views + i) * block;
      std::copy(src, src + static_cast<std::ptrdiff_t>(block), out.data.begin() +
                                                                   static_cast<std::ptrdiff_t>(dst));
    }
  }
  return out;
}

Eigen::MatrixXd assemble_guidance(const GuidanceSet& guidance) {
  guidance.validate();
  const int n = guidance.num_views(), d = guidance.dim();
  Eigen::MatrixXd g(2 * n * d, guidance.tokens());
  for (int i = 0; i < n; ++i) {
    g.middleRows(i * d, d) = guidance.views[i].positive.transpose();
    g.middleRows((n + i) * d, d) = guidance.views[i].negative.transpose();
  }
  return g;
}

Eigen::MatrixXd cross_attention(const Eigen::MatrixXd& tokens, const Eigen::MatrixXd& context,
                                const AttentionWeights& weights, Eigen::MatrixXd* attention) {
  weights.validate();
  const int d = weights.dim();
  require(tokens.cols() == d && context.cols() == d, "token dimension does not match weights");
  require(context.rows() > 0, "attention needs at least one context token");
  const Eigen::MatrixXd q = tokens * weights.query;
  const Eigen::MatrixXd k = context * weights.key;
  const Eigen::MatrixXd v = context * weights.value;
  Eigen::MatrixXd a = (q * k.transpose()) / std::sqrt(static_cast<double>(d));
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double top = a.row(r).maxCoeff();
    a.row(r) = (a.row(r).array() - top).exp();
    a.row(r) /= a.row(r).sum();
  }
  Eigen::MatrixXd out = a * v;
  if (attention) *attention = std::move(a);
  return out;
}

FeatureTensor decoupled_cross_attention(const FeatureTensor& hidden,
                                        const Eigen::MatrixXd& guidance,
                                        const AttentionWeights& weights,
                                        std::vector<Eigen::MatrixXd>* attention) {
  hidden.validate();
  weights.validate();
  const int d = weights.dim();
  require(hidden.channels % (2 * d) == 0,
          "hidden channels " + std::to_string(hidden.channels) + " are not 2N blocks of " +
              std::to_string(d));
  require(guidance.rows() == hidden.channels,
          "guidance rows " + std::to_string(guidance.rows()) + " do not match hidden channels " +
              std::to_string(hidden.channels));
  require(guidance.cols() > 0 && finite(guidance), "guidance must be non-empty and finite");
  const int groups = hidden.channels / d;
  FeatureTensor z(hidden.channels, hidden.width, hidden.height);
  std::vector<Eigen::MatrixXd> maps(attention ? groups : 0);
  const std::size_t n = hidden.plane();
  parallel_for(static_cast<std::size_t>(groups), [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      const int first = static_cast<int>(g) * d;
      const Eigen::MatrixXd context = guidance.middleRows(first, d).transpose();
      Eigen::MatrixXd a;
      const Eigen::MatrixXd out =
          cross_attention(group_tokens(hidden, first, d), context, weights, attention ? &a : nullptr);
      for (int c = 0; c < d; ++c) {
        double* dst = z.data.data() + static_cast<std::size_t>(first + c) * n;
        for (std::size_t p = 0; p < n; ++p) dst[p] = out(static_cast<Eigen::Index>(p), c);
      }
      if (attention) maps[g] = std::move(a);
    }
  });
  if (attention) *attention = std::move(maps);
  return z;
}

FeatureTensor aggregate_regions(const FeatureTensor& z, const RegionLayout& layout) {
  layout.validate();
  require(z.width == layout.width && z.height == layout.height,
          "feature size does not match layout canvas");
  const int n = layout.num_views();
  require(z.channels > 0 && z.channels % (2 * n) == 0,
          "channels " + std::to_string(z.channels) + " do not split into 2 x " +
              std::to_string(n) + " blocks");
  const int d = z.channels / (2 * n);
  FeatureTensor out(2 * d, z.width, z.height);
  for (int i = 0; i < n; ++i) {
    const Rect& r = layout.regions[i];
    for (int c = 0; c < d; ++c) {
      for (int y = r.y; y < r.y + r.height; ++y) {
        for (int x = r.x; x < r.x + r.width; ++x) {
          out.at(c, x, y) = z.at(i * d + c, x, y);
          out.at(d + c, x, y) = z.at((n + i) * d + c, x, y);
        }
      }
    }
  }
  return out;
}

FeatureTensor decoupled_pass(const FeatureTensor& h, const GuidanceSet& guidance,
                             const RegionLayout& layout, const AttentionWeights& weights,
                             std::vector<Eigen::MatrixXd>* attention) {
  h.validate();
  guidance.validate();
  require(guidance.dim() == h.channels / 2, "guidance token dimension must be C/2");
  require(layout.num_views() == guidance.num_views(), "layout and guidance view counts differ");
  const FeatureTensor hidden = replicate_hidden(h, guidance.num_views());
  const Eigen::MatrixXd g = assemble_guidance(guidance);
  return aggregate_regions(decoupled_cross_attention(hidden, g, weights, attention), layout);
}

}  // namespace texmesh

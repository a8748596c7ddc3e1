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
#include <cstdint>
#include <vector>

#include "texmesh/common.hpp"

namespace texmesh {

using Rgba = std::array<std::uint8_t, 4>;

// Row-major RGBA8 image, row 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, Rgba fill = {0, 0, 0, 255});

  bool empty() const { return width == 0 || height == 0; }
  std::size_t index(int x, int y) const {
    return 4 * (static_cast<std::size_t>(y) * width + x);
  }
  Rgba at(int x, int y) const;
  void set(int x, int y, Rgba c);

  bool operator==(const Image&) const = default;
};

}  // namespace texmesh

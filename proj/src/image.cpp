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

#include "texmesh/image.hpp"

namespace texmesh {

Image::Image(int w, int h, Rgba fill) : width(w), height(h) {
  if (w < 0 || h < 0) throw InvalidArgument("image size must be non-negative");
  pixels.resize(4 * static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < pixels.size(); i += 4) {
    for (int c = 0; c < 4; ++c) pixels[i + c] = fill[c];
  }
}

Rgba Image::at(int x, int y) const {
  const std::size_t i = index(x, y);
  return {pixels[i], pixels[i + 1], pixels[i + 2], pixels[i + 3]};
}

void Image::set(int x, int y, Rgba c) {
  const std::size_t i = index(x, y);
  for (int k = 0; k < 4; ++k) pixels[i + k] = c[k];
}

}  // namespace texmesh

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
#include <memory>
#include <string>
#include <vector>

#include "texmesh/paint.hpp"

namespace texmesh {

struct InpaintParams {
  int k = 6;
  double position_weight = 1.0;
  int tile_resolution = 256;
  std::string inpainter = "harmonic";
  std::uint64_t seed = 1;
  int max_rounds = 100;
  double coverage_threshold = 0.5;

  void validate() const;
};

struct OcclusionCluster {
  std::vector<int> faces;
  Vec3 centroid = Vec3::Zero();     // area weighted
  Vec3 mean_normal = Vec3::UnitZ();  // area weighted, unit
  bool degenerate_normal = false;
  Camera camera;
};

struct ClusterReport {
  int requested_k = 0;
  int used_k = 0;
  std::vector<double> inertia;  // after every Lloyd round
  int rounds = 0;
  bool converged = false;
  std::size_t reseeded = 0;
};

// Area-weighted k-means over [n_f ; w_p * centroid_f / bbox_diagonal] with
// k-means++ seeding. Cameras are filled in by cluster_viewpoint.
std::vector<OcclusionCluster> cluster_occluded(const TriMesh& mesh, const std::vector<int>& faces,
                                               const InpaintParams& params = {},
                                               ClusterReport* report = nullptr);

// Looks along the inward mean normal at the cluster centroid from the mesh
// bounding sphere; ortho_scale is 1.2 times the cluster's projected extent.
Camera cluster_viewpoint(const TriMesh& mesh, const OcclusionCluster& cluster,
                         int resolution = 256);

enum class CanvasPixel : std::uint8_t { kBackground = 0, kKnown = 1, kMask = 2 };

struct OcclusionCanvas {
  int tile_size = 0;
  int columns = 0;
  int rows = 0;
  Image image;  // alpha 0 on background pixels
  std::vector<CanvasPixel> kind;
  std::vector<int> face;   // -1 on background
  std::vector<Vec3> bary;  // barycentric coordinates in `face`
  std::vector<Camera> cameras;  // per tile
  std::vector<int> tile_cluster;
  // Pixels filled by a fallback rule rather than by the inpainter proper.
  std::vector<std::uint8_t> flagged;

  int width() const { return columns * tile_size; }
  int height() const { return rows * tile_size; }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width() + x; }
  std::size_t count(CanvasPixel k) const;
  // Pixel origin of tile t.
  int tile_x(int t) const { return (t % columns) * tile_size; }
  int tile_y(int t) const { return (t / columns) * tile_size; }
};

// Renders every cluster into its tile. Pixels of faces in `untextured` are
// masked; other faces carry their current atlas colour.
OcclusionCanvas build_canvas(const TriMesh& mesh, const TextureAtlas& atlas,
                             const std::vector<OcclusionCluster>& clusters,
                             const std::vector<int>& untextured, const InpaintParams& params = {});

struct InpaintTileReport {
  std::size_t regions = 0;
  std::size_t flagged_regions = 0;  // no known boundary, filled with the tile mean
  int max_sweeps = 0;
  double max_residual = 0.0;  // in 0..255 units
};

// Plug-in contract: `tile` is RGBA (alpha 0 = background, not part of the
// problem), `mask` marks pixels to fill. Returns a tile of identical size in
// which only mask pixels may differ. `flagged` (same size as mask) receives 1
// for pixels filled by a fallback.
class Inpainter {
 public:
  virtual ~Inpainter() = default;
  virtual Image inpaint(const Image& tile, const std::vector<std::uint8_t>& mask,
                        std::vector<std::uint8_t>& flagged, InpaintTileReport* report) const = 0;
};

// Discrete Laplace fill per 4-connected mask region and channel, Dirichlet
// data from known neighbours, Neumann at background and tile borders.
// Initialized breadth first from the boundary, then Gauss-Seidel until the
// largest update is below `tolerance` (0..255 units) or `max_sweeps`.
class HarmonicInpainter : public Inpainter {
 public:
  explicit HarmonicInpainter(double tolerance = 0.5, int max_sweeps = 10000)
      : tolerance_(tolerance), max_sweeps_(max_sweeps) {}
  Image inpaint(const Image& tile, const std::vector<std::uint8_t>& mask,
                std::vector<std::uint8_t>& flagged, InpaintTileReport* report) const override;

 private:
  double tolerance_;
  int max_sweeps_;
};

// "harmonic" is the only built-in name.
std::unique_ptr<Inpainter> make_inpainter(const std::string& name);

OcclusionCanvas inpaint_canvas(const OcclusionCanvas& canvas, const Inpainter& inpainter,
                               InpaintTileReport* report = nullptr);

// Pulls colours from the canvas into the still-untextured texels of the
// faces in `faces`. Each texel is projected into every tile; among tiles
// whose pixel shows the texel's face the most frontal (highest confidence)
// wins, ties to the lower tile. Returns the number of texels written.
std::size_t reproject(const TriMesh& mesh, const OcclusionCanvas& canvas,
                      const std::vector<int>& faces, TextureAtlas& atlas);

struct ExtrapolateReport {
  std::size_t partial_texels = 0;  // filled from the face's own texels
  std::size_t flood_faces = 0;     // filled from neighbouring faces
  int layers = 0;
  std::size_t fallback_faces = 0;  // components without any textured face
};

// Completes the atlas: untextured texels of partly textured faces take the
// face's mean textured colour; fully untextured faces take the area-weighted
// mean colour of already coloured neighbours, breadth first from the
// textured region. Components without any textured face get the global mean
// (mid gray if nothing is textured).
TextureAtlas extrapolate(const TriMesh& mesh, const TextureAtlas& atlas,
                         ExtrapolateReport* report = nullptr);

struct OcclusionReport {
  std::size_t untextured_faces = 0;
  ClusterReport clustering;
  std::size_t mask_pixels = 0;
  InpaintTileReport inpaint;
  std::size_t reprojected_texels = 0;
  ExtrapolateReport extrapolation;
};

TextureAtlas inpaint_occlusions(const TriMesh& mesh, const TextureAtlas& atlas,
                                const InpaintParams& params = {},
                                OcclusionReport* report = nullptr,
                                OcclusionCanvas* canvas_out = nullptr);

}  // namespace texmesh

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
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "texmesh/carve.hpp"
#include "texmesh/image.hpp"
#include "texmesh/occlude.hpp"
#include "texmesh/paint.hpp"
#include "texmesh/remesh_tri.hpp"

namespace texmesh {

// "[section]" headers and "key = value" lines; '#' and ';' start comments.
// Keys are stored as "section.key". Throws ParseError on malformed lines and
// duplicate keys.
std::map<std::string, std::string> parse_key_values(std::istream& in);

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

// Every recognised key with its default, in documentation order.
const std::vector<ConfigKey>& config_keys();

enum class RemeshMode { kNone, kTri, kQuad };
enum class ViewGenerator { kNone, kSolid, kChecker, kShaded, kFiles };

struct PipelineConfig {
  std::string field_analytic;
  std::string field_voxel;
  int grid_dims = 64;
  Vec3 grid_origin = Vec3::Zero();
  double grid_spacing = 0.0;  // 0: the grid spans [origin, origin + 1]
  double iso = 0.5;
  CleanParams clean;

  RemeshMode remesh_mode = RemeshMode::kTri;
  RemeshParams remesh;
  double quad_scale = 0.05;
  int field_iterations = 50;

  int view_resolution = 512;
  ViewGenerator generator = ViewGenerator::kNone;
  std::vector<Rgba> colors;
  std::vector<std::string> view_images;
  int checker_size = 32;

  AtlasParams atlas;
  BlendParams blend;
  bool inpaint_enabled = true;
  InpaintParams inpaint;

  std::string input_mesh;
  std::string input_texture;
  std::string output_dir = "out";
  std::string output_name = "mesh";

  std::uint64_t seed = 1;
  int workers = 1;

  double effective_spacing() const;
};

// Missing keys take their defaults. Throws InvalidArgument naming the key on
// unknown keys or bad values.
PipelineConfig make_config(const std::map<std::string, std::string>& values);
// File values first, then `overrides`.
PipelineConfig load_config(const std::string& path,
                           const std::map<std::string, std::string>& overrides = {});

// Ordered key=value lines.
class Stats {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, long long value);
  void add(const std::string& key, std::size_t value) { add(key, static_cast<long long>(value)); }
  void add(const std::string& key, int value) { add(key, static_cast<long long>(value)); }
  void append(const Stats& other);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  // Throws OutOfRange for a missing key.
  const std::string& get(const std::string& key) const;
  double number(const std::string& key) const { return std::stod(get(key)); }
  std::string to_text() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Mesh with vertices rounded to the OBJ precision, so that painting the
// in-memory mesh and painting the written file give the same atlas.
TriMesh quantize_for_obj(const TriMesh& mesh);

GridField load_field(const PipelineConfig& config);

// Views for the default cameras from the configured generator or files.
std::vector<View> make_views(const TriMesh& mesh, const PipelineConfig& config);

struct CarveResult {
  TriMesh mesh;  // triangles, quantized
  Stats stats;
  std::vector<std::string> files;
  double seconds = 0;
};
// field -> marching cubes -> clean -> remesh; writes <name>.obj (plus
// <name>_quad.obj in quad mode) and carve_stats.txt.
CarveResult cmd_carve(const PipelineConfig& config);

// input.mesh -> remesh; writes <name>.obj (and <name>_quad.obj) and remesh_stats.txt.
CarveResult cmd_remesh(const PipelineConfig& config);

struct PaintResult {
  TextureAtlas atlas;
  Stats stats;
  std::vector<std::string> files;
  double seconds = 0;
};
// Cameras, views, back-projection and (unless disabled) occlusion inpainting;
// writes <name>_textured.{obj,mtl,png} and paint_stats.txt.
PaintResult cmd_paint(const PipelineConfig& config);
PaintResult cmd_paint(const PipelineConfig& config, const TriMesh& mesh);

// input.mesh plus input.texture (alpha marks textured texels) -> occlusion
// inpainting (regardless of inpaint.enabled); writes
// <name>_inpainted.{obj,mtl,png} and inpaint_stats.txt.
PaintResult cmd_inpaint(const PipelineConfig& config);

struct PipelineResult {
  CarveResult carve;
  PaintResult paint;
  double seconds = 0;
};
// Carve then paint. Wall-clock times go to timing.txt, kept apart from the
// stats files so those stay byte-identical between runs.
PipelineResult cmd_pipeline(const PipelineConfig& config);

struct AttendDemoParams {
  int views = 4;
  int channels = 8;
  int width = 64;
  int height = 64;
  int tokens = 3;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  void validate() const;
};
// Seeded decoupled pass; writes regions.png, attention_<g>.png per channel
// group (one panel per token), output.png (one panel per channel) and
// attend_stats.txt.
Stats cmd_attend_demo(const AttendDemoParams& params);

}  // namespace texmesh

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

#include "texmesh/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "texmesh/attend.hpp"
#include "texmesh/field.hpp"
#include "texmesh/io.hpp"
#include "texmesh/remesh_quad.hpp"

namespace texmesh {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw InvalidArgument("config key '" + key + "' = '" + value + "': " + why);
}

double as_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(d)) bad_value(key, v, "expected a number");
  return d;
}

long long as_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long n = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') bad_value(key, v, "expected an integer");
  return n;
}

int as_int_in(const std::string& key, const std::string& v, long long lo, long long hi) {
  const long long n = as_int(key, v);
  if (n < lo || n > hi) {
    bad_value(key, v, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(n);
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  bad_value(key, v, "expected true or false");
}

Rgba as_color(const std::string& key, std::string v) {
  if (!v.empty() && v[0] == '#') v.erase(0, 1);
  if (v.size() != 6 || v.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos) {
    bad_value(key, v, "expected a colour like ff8000");
  }
  const unsigned long rgb = std::stoul(v, nullptr, 16);
  return {static_cast<std::uint8_t>(rgb >> 16), static_cast<std::uint8_t>(rgb >> 8),
          static_cast<std::uint8_t>(rgb), 255};
}

void require_file(const std::string& key, const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw InvalidArgument("config key '" + key + "': cannot read '" + path + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

fs::path output_path(const PipelineConfig& c, const std::string& file) {
  fs::create_directories(c.output_dir);
  return fs::path(c.output_dir) / file;
}

TriMesh read_mesh(const PipelineConfig& c) {
  if (c.input_mesh.empty()) throw InvalidArgument("config key 'input.mesh' is required");
  require_file("input.mesh", c.input_mesh);
  TriMesh mesh = to_trimesh(read_obj(c.input_mesh));
  if (mesh.empty()) throw InvalidArgument("config key 'input.mesh': '" + c.input_mesh + "' has no faces");
  mesh.validate();
  return mesh;
}

void add_mesh_stats(Stats& s, const std::string& prefix, const TriMesh& m, double target) {
  const EdgeTable edges(m);
  s.add(prefix + "vertices", m.num_vertices());
  s.add(prefix + "faces", m.num_faces());
  s.add(prefix + "edges", edges.edges().size());
  s.add(prefix + "boundary_edges", edges.boundary_edge_count());
  s.add(prefix + "nonmanifold_edges", edges.nonmanifold_edge_count());
  s.add(prefix + "euler", static_cast<long long>(euler_characteristic(m, edges)));
  s.add(prefix + "volume", enclosed_volume(m));
  s.add(prefix + "area", surface_area(m));
  s.add(prefix + "mean_edge", mean_edge_length(m));
  if (target > 0 && !edges.edges().empty()) {
    std::size_t in_band = 0;
    for (const Edge& e : edges.edges()) {
      const double len = (m.vertices[e.v0] - m.vertices[e.v1]).norm();
      in_band += len >= 0.8 * target && len <= 4.0 / 3.0 * target;
    }
    s.add(prefix + "edge_band_fraction", static_cast<double>(in_band) / edges.edges().size());
  }
  const std::vector<int> valence = vertex_valences(m);
  const std::vector<char> boundary = boundary_vertices(m);
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t v = 0; v < valence.size(); ++v) {
    if (boundary[v] || valence[v] == 0) continue;
    sum += valence[v];
    ++n;
  }
  s.add(prefix + "mean_interior_valence", n ? sum / n : 0.0);
}

// Remesh stage shared by carve and remesh; writes the outputs.
CarveResult finish_mesh(const PipelineConfig& c, TriMesh mesh, Stats stats, Clock::time_point t0,
                        const std::string& stats_file) {
  CarveResult result;
  if (c.remesh_mode != RemeshMode::kNone) {
    RemeshReport rep;
    mesh = isotropic_remesh(mesh, c.remesh, &rep);
    double residual = 0;
    for (const RemeshRound& r : rep.rounds) residual = std::max(residual, r.max_tangent_residual);
    stats.add("remesh.target_edge_length", c.remesh.target_edge_length);
    stats.add("remesh.iterations", c.remesh.iterations);
    stats.add("remesh.damping", c.remesh.damping);
    stats.add("remesh.max_tangent_residual", residual);
  }
  mesh = quantize_for_obj(mesh);
  add_mesh_stats(stats, "mesh.", mesh,
                 c.remesh_mode == RemeshMode::kNone ? 0.0 : c.remesh.target_edge_length);
  const std::string obj = output_path(c, c.output_name + ".obj").string();
  write_obj(obj, to_obj(mesh));
  result.files.push_back(obj);
  if (c.remesh_mode == RemeshMode::kQuad) {
    OrientationOptions opt;
    opt.iterations = c.field_iterations;
    opt.seed = c.seed;
    const OrientationField orient = optimize_orientation_field(mesh, opt);
    const PositionField pos =
        optimize_position_field(mesh, orient, c.quad_scale, c.field_iterations);
    QuadReport qrep;
    const QuadDominantMesh quad = extract_quads(mesh, orient, pos, &qrep);
    stats.add("quad.scale", c.quad_scale);
    stats.add("quad.field_iterations", c.field_iterations);
    stats.add("quad.sites", qrep.sites);
    stats.add("quad.links", qrep.links);
    stats.add("quad.quads", quad.num_quads());
    stats.add("quad.triangles", quad.num_triangles());
    stats.add("quad.interior_triangles", quad.num_interior_triangles());
    stats.add("quad.irregular", qrep.irregular.size());
    stats.add("quad.skipped_cycles", qrep.skipped_cycles);
    const std::string qobj = output_path(c, c.output_name + "_quad.obj").string();
    write_obj(qobj, to_obj(quad));
    result.files.push_back(qobj);
  }
  const std::string sfile = output_path(c, stats_file).string();
  stats.write(sfile);
  result.files.push_back(sfile);
  result.mesh = std::move(mesh);
  result.stats = std::move(stats);
  result.seconds = seconds_since(t0);
  return result;
}

void add_occlusion_stats(Stats& s, const OcclusionReport& r) {
  s.add("occlusion.untextured_faces", r.untextured_faces);
  s.add("occlusion.requested_k", r.clustering.requested_k);
  s.add("occlusion.used_k", r.clustering.used_k);
  s.add("occlusion.rounds", r.clustering.rounds);
  s.add("occlusion.converged", std::string(r.clustering.converged ? "true" : "false"));
  s.add("occlusion.inertia", r.clustering.inertia.empty() ? 0.0 : r.clustering.inertia.back());
  bool monotone = true;
  for (std::size_t i = 1; i < r.clustering.inertia.size(); ++i) {
    monotone = monotone && r.clustering.inertia[i] <= r.clustering.inertia[i - 1] * (1 + 1e-12);
  }
  s.add("occlusion.inertia_monotone", std::string(monotone ? "true" : "false"));
  s.add("occlusion.mask_pixels", r.mask_pixels);
  s.add("occlusion.regions", r.inpaint.regions);
  s.add("occlusion.flagged_regions", r.inpaint.flagged_regions);
  s.add("occlusion.max_sweeps", r.inpaint.max_sweeps);
  s.add("occlusion.max_residual", r.inpaint.max_residual);
  s.add("occlusion.reprojected_texels", r.reprojected_texels);
  s.add("extrapolate.partial_texels", r.extrapolation.partial_texels);
  s.add("extrapolate.flood_faces", r.extrapolation.flood_faces);
  s.add("extrapolate.layers", r.extrapolation.layers);
  s.add("extrapolate.fallback_faces", r.extrapolation.fallback_faces);
}

void add_coverage_stats(Stats& s, const std::string& prefix, const TextureAtlas& a) {
  const std::size_t textured = a.count(TexelState::kTextured);
  const std::size_t untextured = a.count(TexelState::kUntextured);
  s.add(prefix + "textured_texels", textured);
  s.add(prefix + "untextured_texels", untextured);
  s.add(prefix + "coverage", textured + untextured
                                 ? static_cast<double>(textured) / (textured + untextured)
                                 : 0.0);
}

PaintResult finish_texture(const PipelineConfig& c, const TriMesh& mesh, const TextureAtlas& coarse,
                           bool fill, Stats stats, Clock::time_point t0,
                           const std::string& suffix, const std::string& stats_file) {
  PaintResult result;
  add_coverage_stats(stats, "coarse.", coarse);
  if (fill) {
    OcclusionReport rep;
    result.atlas = inpaint_occlusions(mesh, coarse, c.inpaint, &rep);
    stats.add("inpaint.k", c.inpaint.k);
    stats.add("inpaint.position_weight", c.inpaint.position_weight);
    stats.add("inpaint.inpainter", c.inpaint.inpainter);
    add_occlusion_stats(stats, rep);
  } else {
    result.atlas = coarse;
  }
  add_coverage_stats(stats, "final.", result.atlas);
  const TexturedPaths paths = write_textured_obj(
      output_path(c, c.output_name + suffix + ".obj").string(), mesh, result.atlas);
  result.files = {paths.obj, paths.mtl, paths.png};
  const std::string sfile = output_path(c, stats_file).string();
  stats.write(sfile);
  result.files.push_back(sfile);
  result.stats = std::move(stats);
  result.seconds = seconds_since(t0);
  return result;
}

Stats atlas_stats(const PipelineConfig& c, const TextureAtlas& atlas) {
  Stats s;
  s.add("atlas.width", atlas.width);
  s.add("atlas.height", atlas.height);
  s.add("atlas.texel_density", atlas.texel_density);
  s.add("atlas.face_texels", atlas.state.size() - atlas.count(TexelState::kBackground));
  s.add("blend.beta", c.blend.beta);
  s.add("blend.side_suppression", c.blend.side_suppression);
  return s;
}

Image gray_panels(const std::vector<std::vector<double>>& panels, int w, int h, double lo,
                  double hi) {
  const int n = static_cast<int>(panels.size());
  Image img(n * w + (n - 1), h, {0, 0, 0, 255});
  const double span = hi > lo ? hi - lo : 1.0;
  for (int p = 0; p < n; ++p) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = (panels[p][static_cast<std::size_t>(y) * w + x] - lo) / span;
        const auto g = static_cast<std::uint8_t>(std::clamp(std::lround(255 * v), 0L, 255L));
        img.set(p * (w + 1) + x, y, {g, g, g, 255});
      }
    }
  }
  return img;
}

void require_view_source(const PipelineConfig& c) {
  if (c.generator == ViewGenerator::kNone) {
    throw InvalidArgument("config key 'views.generator' or 'views.images' is required");
  }
  for (const std::string& p : c.view_images) require_file("views.images", p);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string section, raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const std::size_t hash = s.find_first_of("#;");
    if (hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw ParseError("bad section header '" + s + "'", line);
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line);
    const std::string full = section.empty() ? key : section + "." + key;
    if (!out.emplace(full, trim(s.substr(eq + 1))).second) {
      throw ParseError("duplicate key '" + full + "'", line);
    }
  }
  return out;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"field.analytic", "", "CSG expression, e.g. sphere(0.5,0.5,0.5,0.3)"},
      {"field.voxel", "", "CAPAVOX1 occupancy grid (instead of field.analytic)"},
      {"field.dims", "64", "samples per axis for analytic fields"},
      {"field.origin", "0 0 0", "grid origin for analytic fields"},
      {"field.spacing", "0", "grid spacing; 0 spans the unit cube"},
      {"field.iso", "0.5", "iso level in (0,1)"},
      {"clean.min_component_fraction", "0.02", "drop components below this face fraction"},
      {"remesh.mode", "tri", "none, tri or quad"},
      {"remesh.target_edge_length", "0.03", "isotropic target edge length"},
      {"remesh.iterations", "5", "isotropic remeshing rounds"},
      {"remesh.damping", "0.5", "tangential smoothing damping in (0,1]"},
      {"remesh.rho", "0.05", "quad lattice spacing"},
      {"remesh.field_iterations", "50", "orientation/position field sweeps"},
      {"cameras.resolution", "512", "view resolution for generated views"},
      {"views.generator", "", "solid, checker, shaded or files"},
      {"views.colors", "ff0000 00ff00 0000ff ffff00", "per-view colours for solid/checker"},
      {"views.images", "", "four PNG paths for the files generator"},
      {"views.checker_size", "32", "checker cell size in pixels"},
      {"atlas.texel_density", "64", "texels per unit sqrt(face area)"},
      {"atlas.size", "0", "fixed square atlas size; 0 derives it from the density"},
      {"atlas.max_size", "4096", "largest atlas side"},
      {"atlas.padding", "2", "texels between face blocks (>= 2)"},
      {"blend.beta", "4", "confidence exponent"},
      {"blend.side_suppression", "0.7", "side view suppression s in [0,1]"},
      {"inpaint.enabled", "true", "fill occluded regions"},
      {"inpaint.k", "6", "occlusion clusters"},
      {"inpaint.position_weight", "1", "position weight of the clustering features"},
      {"inpaint.tile_resolution", "256", "canvas tile size"},
      {"inpaint.inpainter", "harmonic", "inpainter name"},
      {"inpaint.max_rounds", "100", "k-means round limit"},
      {"input.mesh", "", "input OBJ for paint, remesh and inpaint"},
      {"input.texture", "", "coarse atlas PNG for inpaint"},
      {"output.directory", "out", "output directory"},
      {"output.name", "mesh", "output file stem"},
      {"run.seed", "1", "random seed"},
      {"run.workers", "1", "worker threads"},
  };
  return keys;
}

double PipelineConfig::effective_spacing() const {
  return grid_spacing > 0 ? grid_spacing : 1.0 / (grid_dims - 1);
}

PipelineConfig make_config(const std::map<std::string, std::string>& given) {
  std::map<std::string, std::string> v;
  for (const ConfigKey& k : config_keys()) v[k.name] = k.default_value;
  for (const auto& [key, value] : given) {
    if (!v.count(key)) throw InvalidArgument("unknown config key '" + key + "'");
    v[key] = value;
  }
  PipelineConfig c;
  c.field_analytic = v["field.analytic"];
  c.field_voxel = v["field.voxel"];
  if (!c.field_analytic.empty() && !c.field_voxel.empty()) {
    throw InvalidArgument("config keys 'field.analytic' and 'field.voxel' are exclusive");
  }
  if (!c.field_analytic.empty()) {
    try {
      AnalyticField::parse(c.field_analytic);
    } catch (const Error& e) {
      bad_value("field.analytic", c.field_analytic, e.what());
    }
  }
  c.grid_dims = as_int_in("field.dims", v["field.dims"], 2, 1024);
  {
    const auto o = words(v["field.origin"]);
    if (o.size() != 3) bad_value("field.origin", v["field.origin"], "expected three numbers");
    c.grid_origin = Vec3(as_double("field.origin", o[0]), as_double("field.origin", o[1]),
                         as_double("field.origin", o[2]));
  }
  c.grid_spacing = as_double("field.spacing", v["field.spacing"]);
  if (c.grid_spacing < 0) bad_value("field.spacing", v["field.spacing"], "must be >= 0");
  c.iso = as_double("field.iso", v["field.iso"]);
  if (!(c.iso > 0 && c.iso < 1)) bad_value("field.iso", v["field.iso"], "must be in (0,1)");
  c.clean.min_component_fraction =
      as_double("clean.min_component_fraction", v["clean.min_component_fraction"]);
  if (c.clean.min_component_fraction < 0 || c.clean.min_component_fraction > 1) {
    bad_value("clean.min_component_fraction", v["clean.min_component_fraction"],
              "must be in [0,1]");
  }

  const std::string& mode = v["remesh.mode"];
  if (mode == "none") {
    c.remesh_mode = RemeshMode::kNone;
  } else if (mode == "tri") {
    c.remesh_mode = RemeshMode::kTri;
  } else if (mode == "quad") {
    c.remesh_mode = RemeshMode::kQuad;
  } else {
    bad_value("remesh.mode", mode, "expected none, tri or quad");
  }
  c.remesh.target_edge_length =
      as_double("remesh.target_edge_length", v["remesh.target_edge_length"]);
  c.remesh.iterations = as_int_in("remesh.iterations", v["remesh.iterations"], 1, 1000);
  c.remesh.damping = as_double("remesh.damping", v["remesh.damping"]);
  try {
    c.remesh.validate();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string("config section 'remesh': ") + e.what());
  }
  c.quad_scale = as_double("remesh.rho", v["remesh.rho"]);
  if (!(c.quad_scale > 0)) bad_value("remesh.rho", v["remesh.rho"], "must be positive");
  c.field_iterations =
      as_int_in("remesh.field_iterations", v["remesh.field_iterations"], 1, 100000);

  c.view_resolution = as_int_in("cameras.resolution", v["cameras.resolution"], 16, 8192);
  const std::string& gen = v["views.generator"];
  if (gen.empty()) {
    c.generator = ViewGenerator::kNone;
  } else if (gen == "solid") {
    c.generator = ViewGenerator::kSolid;
  } else if (gen == "checker") {
    c.generator = ViewGenerator::kChecker;
  } else if (gen == "shaded") {
    c.generator = ViewGenerator::kShaded;
  } else if (gen == "files") {
    c.generator = ViewGenerator::kFiles;
  } else {
    bad_value("views.generator", gen, "expected solid, checker, shaded or files");
  }
  for (const std::string& w : words(v["views.colors"])) c.colors.push_back(as_color("views.colors", w));
  if (c.colors.empty()) bad_value("views.colors", v["views.colors"], "needs at least one colour");
  c.view_images = words(v["views.images"]);
  if (!c.view_images.empty() && c.generator == ViewGenerator::kNone) c.generator = ViewGenerator::kFiles;
  c.checker_size = as_int_in("views.checker_size", v["views.checker_size"], 1, 8192);

  c.atlas.texel_density = as_double("atlas.texel_density", v["atlas.texel_density"]);
  c.atlas.fixed_size = as_int_in("atlas.size", v["atlas.size"], 0, 1 << 15);
  c.atlas.max_size = as_int_in("atlas.max_size", v["atlas.max_size"], 1, 1 << 15);
  c.atlas.padding = as_int_in("atlas.padding", v["atlas.padding"], 0, 64);
  try {
    c.atlas.validate();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string("config section 'atlas': ") + e.what());
  }
  c.blend.beta = as_double("blend.beta", v["blend.beta"]);
  if (c.blend.beta < 0) bad_value("blend.beta", v["blend.beta"], "must be >= 0");
  c.blend.side_suppression = as_double("blend.side_suppression", v["blend.side_suppression"]);
  if (c.blend.side_suppression < 0 || c.blend.side_suppression > 1) {
    bad_value("blend.side_suppression", v["blend.side_suppression"], "must be in [0,1]");
  }

  c.inpaint_enabled = as_bool("inpaint.enabled", v["inpaint.enabled"]);
  c.inpaint.k = as_int_in("inpaint.k", v["inpaint.k"], 1, 1024);
  c.inpaint.position_weight = as_double("inpaint.position_weight", v["inpaint.position_weight"]);
  c.inpaint.tile_resolution =
      as_int_in("inpaint.tile_resolution", v["inpaint.tile_resolution"], 16, 8192);
  c.inpaint.inpainter = v["inpaint.inpainter"];
  c.inpaint.max_rounds = as_int_in("inpaint.max_rounds", v["inpaint.max_rounds"], 1, 100000);
  try {
    c.inpaint.validate();
    make_inpainter(c.inpaint.inpainter);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string("config section 'inpaint': ") + e.what());
  }

  c.input_mesh = v["input.mesh"];
  c.input_texture = v["input.texture"];
  c.output_dir = v["output.directory"];
  c.output_name = v["output.name"];
  if (c.output_dir.empty()) bad_value("output.directory", "", "must not be empty");
  if (c.output_name.empty() || c.output_name.find('/') != std::string::npos) {
    bad_value("output.name", c.output_name, "must be a plain file stem");
  }
  const long long seed = as_int("run.seed", v["run.seed"]);
  if (seed < 0) bad_value("run.seed", v["run.seed"], "must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.inpaint.seed = c.seed;
  c.workers = as_int_in("run.workers", v["run.workers"], 1, 256);
  return c;
}

PipelineConfig load_config(const std::string& path,
                           const std::map<std::string, std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
  std::map<std::string, std::string> values = parse_key_values(in);
  for (const auto& [k, val] : overrides) values[k] = val;
  return make_config(values);
}

void Stats::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}
void Stats::add(const std::string& key, double value) { add(key, fmt(value)); }
void Stats::add(const std::string& key, long long value) { add(key, std::to_string(value)); }

void Stats::append(const Stats& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

const std::string& Stats::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw OutOfRange("no stat '" + key + "'");
}

std::string Stats::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

void Stats::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_text();
  if (!out) throw IoError("write to '" + path + "' failed");
}

TriMesh quantize_for_obj(const TriMesh& mesh) {
  TriMesh out = mesh;
  char buf[64];
  for (Vec3& v : out.vertices) {
    for (int a = 0; a < 3; ++a) {
      std::snprintf(buf, sizeof buf, "%.6f", v[a]);
      v[a] = std::strtod(buf, nullptr) + 0.0;
    }
  }
  return out;
}

GridField load_field(const PipelineConfig& c) {
  if (!c.field_voxel.empty()) {
    require_file("field.voxel", c.field_voxel);
    try {
      return read_vox(c.field_voxel);
    } catch (const ParseError& e) {
      throw InvalidArgument("config key 'field.voxel': " + std::string(e.what()));
    }
  }
  if (c.field_analytic.empty()) {
    throw InvalidArgument("config key 'field.analytic' or 'field.voxel' is required");
  }
  const double h = c.effective_spacing();
  return sample_grid(AnalyticField::parse(c.field_analytic),
                     {c.grid_dims, c.grid_dims, c.grid_dims}, c.grid_origin, h);
}

std::vector<View> make_views(const TriMesh& mesh, const PipelineConfig& c) {
  std::vector<View> views;
  if (c.generator == ViewGenerator::kNone) {
    throw InvalidArgument("config key 'views.generator' or 'views.images' is required");
  }
  if (c.generator == ViewGenerator::kFiles) {
    if (c.view_images.size() != 4) {
      throw InvalidArgument("config key 'views.images' needs 4 paths, got " +
                            std::to_string(c.view_images.size()));
    }
    std::vector<Image> images;
    for (const std::string& p : c.view_images) {
      require_file("views.images", p);
      try {
        images.push_back(read_png(p));
      } catch (const ParseError& e) {
        throw InvalidArgument("config key 'views.images': " + std::string(e.what()));
      }
      if (images.back().width != images[0].width || images.back().width != images.back().height) {
        throw InvalidArgument("config key 'views.images': images must be square and equal-sized");
      }
    }
    const std::vector<Camera> cams = default_cameras(mesh, images[0].width);
    for (std::size_t i = 0; i < cams.size(); ++i) views.push_back({cams[i], std::move(images[i])});
    return views;
  }
  const int res = c.view_resolution;
  const std::vector<Camera> cams = default_cameras(mesh, res);
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const Rgba color = c.colors[i % c.colors.size()];
    Image img(res, res, color);
    if (c.generator == ViewGenerator::kChecker) {
      const Rgba other{static_cast<std::uint8_t>(255 - color[0]),
                       static_cast<std::uint8_t>(255 - color[1]),
                       static_cast<std::uint8_t>(255 - color[2]), 255};
      for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
          if ((x / c.checker_size + y / c.checker_size) % 2) img.set(x, y, other);
        }
      }
    } else if (c.generator == ViewGenerator::kShaded) {
      const RenderBuffers rb = rasterize(mesh, cams[i]);
      for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
          const std::size_t p = rb.index(x, y);
          if (rb.face_id[p] < 0) {
            img.set(x, y, {0, 0, 0, 255});
            continue;
          }
          Rgba px{0, 0, 0, 255};
          for (int a = 0; a < 3; ++a) {
            px[a] = static_cast<std::uint8_t>(std::lround(127.5 * (rb.normal[p][a] + 1.0)));
          }
          img.set(x, y, px);
        }
      }
    }
    views.push_back({cams[i], std::move(img)});
  }
  return views;
}

CarveResult cmd_carve(const PipelineConfig& c) {
  const auto t0 = Clock::now();
  set_worker_count(c.workers);
  const GridField grid = load_field(c);
  Stats stats;
  stats.add("field.source", std::string(c.field_voxel.empty() ? "analytic" : "voxel"));
  stats.add("field.dims", std::to_string(grid.dims()[0]) + "x" + std::to_string(grid.dims()[1]) +
                              "x" + std::to_string(grid.dims()[2]));
  stats.add("field.spacing", grid.spacing());
  stats.add("field.iso", c.iso);
  const TriMesh raw = marching_cubes(grid, c.iso);
  stats.add("mc.vertices", raw.num_vertices());
  stats.add("mc.faces", raw.num_faces());
  if (raw.empty()) throw Error("the field has no iso-surface at level " + fmt(c.iso));
  CleanReport crep;
  const TriMesh cleaned = clean(raw, c.clean, &crep);
  std::istringstream lines(crep.to_key_values());
  for (std::string line; std::getline(lines, line);) {
    const std::size_t eq = line.find('=');
    stats.add(line.substr(0, eq), line.substr(eq + 1));
  }
  return finish_mesh(c, cleaned, std::move(stats), t0, "carve_stats.txt");
}

CarveResult cmd_remesh(const PipelineConfig& c) {
  const auto t0 = Clock::now();
  set_worker_count(c.workers);
  const TriMesh mesh = read_mesh(c);
  Stats stats;
  stats.add("input.vertices", mesh.num_vertices());
  stats.add("input.faces", mesh.num_faces());
  return finish_mesh(c, mesh, std::move(stats), t0, "remesh_stats.txt");
}

PaintResult cmd_paint(const PipelineConfig& c) {
  require_view_source(c);
  return cmd_paint(c, read_mesh(c));
}

PaintResult cmd_paint(const PipelineConfig& c, const TriMesh& input) {
  const auto t0 = Clock::now();
  set_worker_count(c.workers);
  const TriMesh mesh = quantize_for_obj(input);
  mesh.validate();
  const std::vector<View> views = make_views(mesh, c);
  const TextureAtlas atlas = build_atlas(mesh, c.atlas);
  Stats stats;
  stats.add("paint.views", views.size());
  stats.add("paint.view_resolution", views[0].camera.width);
  stats.add("paint.ortho_scale", views[0].camera.ortho_scale);
  stats.append(atlas_stats(c, atlas));
  const TextureAtlas coarse = backproject(mesh, atlas, views, c.blend);
  return finish_texture(c, mesh, coarse, c.inpaint_enabled, std::move(stats), t0, "_textured", "paint_stats.txt");
}

PaintResult cmd_inpaint(const PipelineConfig& c) {
  const auto t0 = Clock::now();
  set_worker_count(c.workers);
  if (c.input_texture.empty()) throw InvalidArgument("config key 'input.texture' is required");
  require_file("input.texture", c.input_texture);
  const TriMesh mesh = read_mesh(c);
  const ObjDocument doc = read_obj(c.input_mesh);
  TextureAtlas atlas = build_atlas(mesh, c.atlas);
  if (doc.has_uvs()) {
    for (std::size_t f = 0; f < doc.faces.size(); ++f) {
      for (int k = 0; k < 3 && doc.faces[f].size() == 3; ++k) {
        const Vec2 uv = doc.uvs[doc.face_uvs[f][k]];
        if ((uv - atlas.uv(f, k)).cwiseAbs().maxCoeff() > 2e-6) {
          throw InvalidArgument("config key 'input.mesh': texture coordinates do not match the "
                                "atlas built from the atlas.* settings");
        }
      }
    }
  }
  Image img;
  try {
    img = read_png(c.input_texture);
  } catch (const ParseError& e) {
    throw InvalidArgument("config key 'input.texture': " + std::string(e.what()));
  }
  if (img.width != atlas.width || img.height != atlas.height) {
    throw InvalidArgument("config key 'input.texture': image is " + std::to_string(img.width) +
                          "x" + std::to_string(img.height) + ", atlas is " +
                          std::to_string(atlas.width) + "x" + std::to_string(atlas.height));
  }
  for (std::size_t t = 0; t < atlas.state.size(); ++t) {
    if (atlas.texel_face[t] < 0) continue;
    if (img.pixels[4 * t + 3] == 255) {
      atlas.state[t] = TexelState::kTextured;
      std::copy_n(img.pixels.begin() + 4 * t, 4, atlas.image.pixels.begin() + 4 * t);
    }
  }
  Stats stats = atlas_stats(c, atlas);
  return finish_texture(c, mesh, atlas, true, std::move(stats), t0, "_inpainted", "inpaint_stats.txt");
}

PipelineResult cmd_pipeline(const PipelineConfig& c) {
  const auto t0 = Clock::now();
  require_view_source(c);
  PipelineResult r;
  r.carve = cmd_carve(c);
  r.paint = cmd_paint(c, r.carve.mesh);
  r.seconds = seconds_since(t0);
  std::ofstream timing(output_path(c, "timing.txt"));
  timing << "carve.seconds=" << fmt(r.carve.seconds) << "\npaint.seconds=" << fmt(r.paint.seconds)
         << "\ntotal.seconds=" << fmt(r.seconds) << "\n";
  return r;
}

void AttendDemoParams::validate() const {
  if (views < 1 || views > 64) throw InvalidArgument("attend views must be in [1, 64]");
  if (channels < 2 || channels % 2) throw InvalidArgument("attend channels must be even and >= 2");
  if (width < 2 || height < 2 || width > 4096 || height > 4096) {
    throw InvalidArgument("attend canvas must be between 2 and 4096 pixels per side");
  }
  if (tokens < 1 || tokens > 1024) throw InvalidArgument("attend tokens must be in [1, 1024]");
  if (output_dir.empty()) throw InvalidArgument("attend output directory must not be empty");
}

Stats cmd_attend_demo(const AttendDemoParams& p) {
  p.validate();
  const int d = p.channels / 2;
  std::mt19937_64 rng(p.seed);
  auto uniform = [&] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
  const AttentionWeights weights = AttentionWeights::random(d, p.seed);
  FeatureTensor h(p.channels, p.width, p.height);
  for (double& v : h.data) v = uniform();
  auto random_tokens = [&] {
    Eigen::MatrixXd m(p.tokens, d);
    for (int r = 0; r < p.tokens; ++r) {
      for (int col = 0; col < d; ++col) m(r, col) = 3.0 * uniform();
    }
    return m;
  };
  GuidanceSet guidance;
  for (int i = 0; i < p.views; ++i) guidance.views.push_back({random_tokens(), random_tokens()});
  const RegionLayout layout = default_layout(p.views, p.width, p.height);
  std::vector<Eigen::MatrixXd> maps;
  const FeatureTensor out = decoupled_pass(h, guidance, layout, weights, &maps);

  // Perturb the last view and count changes outside its rectangle.
  GuidanceSet perturbed = guidance;
  perturbed.views.back() = {random_tokens(), random_tokens()};
  const FeatureTensor other = decoupled_pass(h, perturbed, layout, weights);
  std::size_t violations = 0, changed_inside = 0;
  for (int c = 0; c < out.channels; ++c) {
    for (int y = 0; y < p.height; ++y) {
      for (int x = 0; x < p.width; ++x) {
        const bool differs = out.at(c, x, y) != other.at(c, x, y);
        if (layout.region_at(x, y) == p.views - 1) {
          changed_inside += differs;
        } else {
          violations += differs;
        }
      }
    }
  }

  fs::create_directories(p.output_dir);
  const fs::path dir(p.output_dir);
  Image regions(p.width, p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const auto g = static_cast<std::uint8_t>(
          p.views > 1 ? 255 * layout.region_at(x, y) / (p.views - 1) : 255);
      regions.set(x, y, {g, g, g, 255});
    }
  }
  write_png((dir / "regions.png").string(), regions);
  const std::size_t n = h.plane();
  for (std::size_t g = 0; g < maps.size(); ++g) {
    std::vector<std::vector<double>> panels(p.tokens, std::vector<double>(n));
    for (int t = 0; t < p.tokens; ++t) {
      for (std::size_t q = 0; q < n; ++q) panels[t][q] = maps[g](static_cast<Eigen::Index>(q), t);
    }
    write_png((dir / ("attention_" + std::to_string(g) + ".png")).string(),
              gray_panels(panels, p.width, p.height, 0.0, 1.0));
  }
  std::vector<std::vector<double>> channels(out.channels);
  for (int c = 0; c < out.channels; ++c) {
    channels[c].assign(out.data.begin() + static_cast<std::ptrdiff_t>(c * n),
                       out.data.begin() + static_cast<std::ptrdiff_t>((c + 1) * n));
  }
  const auto [lo, hi] = std::minmax_element(out.data.begin(), out.data.end());
  write_png((dir / "output.png").string(), gray_panels(channels, p.width, p.height, *lo, *hi));

  Stats s;
  s.add("attend.views", p.views);
  s.add("attend.channels", p.channels);
  s.add("attend.width", p.width);
  s.add("attend.height", p.height);
  s.add("attend.tokens", p.tokens);
  s.add("attend.seed", static_cast<long long>(p.seed));
  s.add("attend.replicated_channels", p.channels * p.views);
  s.add("attend.groups", maps.size());
  s.add("attend.output_min", *lo);
  s.add("attend.output_max", *hi);
  s.add("attend.locality_violations", violations);
  s.add("attend.perturbed_view_changes", changed_inside);
  s.write((dir / "attend_stats.txt").string());
  return s;
}

}  // namespace texmesh

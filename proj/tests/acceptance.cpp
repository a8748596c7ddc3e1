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

// Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "test_fixtures.hpp"
#include "texmesh/attend.hpp"
#include "texmesh/carve.hpp"
#include "texmesh/occlude.hpp"
#include "texmesh/paint.hpp"
#include "texmesh/pipeline.hpp"
#include "texmesh/remesh_quad.hpp"
#include "texmesh/remesh_tri.hpp"

namespace {

using namespace texmesh;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void verdict(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %d %-24s %s  %s\n", id, name, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

std::string printf_string(const char* fmt, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// Criterion 1 and 2 share the carved sphere.
struct SphereCarve {
  TriMesh mesh;
  double spacing = 0;
  double seconds = 0;
};

SphereCarve carve_sphere() {
  set_worker_count(1);
  const auto t0 = Clock::now();
  const int dims = 64;
  const double h = 1.0 / (dims - 1);
  const GridField grid = sample_grid(AnalyticField::sphere(Vec3(0.5, 0.5, 0.5), 0.3),
                                     {dims, dims, dims}, Vec3::Zero(), h);
  SphereCarve c;
  c.mesh = clean(marching_cubes(grid, 0.5));
  c.spacing = h;
  c.seconds = since(t0);
  return c;
}

void criterion1(const SphereCarve& c) {
  const EdgeTable edges(c.mesh);
  const bool manifold = edges.is_closed_manifold();
  const long euler = euler_characteristic(c.mesh, edges);
  const double dev = max_radial_deviation(c.mesh, Vec3(0.5, 0.5, 0.5), 0.3);
  const double exact = 4.0 / 3.0 * std::numbers::pi * 0.027;
  const double vol_err = std::abs(enclosed_volume(c.mesh) - exact) / exact;
  const bool ok = manifold && euler == 2 && dev < c.spacing && vol_err < 0.03 && c.seconds < 5.0;
  verdict(1, "carve correctness", ok,
          printf_string("manifold=%s euler=%ld max_dev=%.5f (<%.5f) volume_err=%.3f%% (<3%%) "
                        "time=%.2fs (<5s)",
                        manifold ? "yes" : "no", euler, dev, c.spacing, 100 * vol_err, c.seconds));
}

void criterion2(const SphereCarve& c) {
  const double l = 0.03;
  RemeshParams p;
  p.target_edge_length = l;
  p.iterations = 5;
  RemeshReport rep;
  const auto t0 = Clock::now();
  const TriMesh m = isotropic_remesh(c.mesh, p, &rep);
  const double secs = since(t0);
  const EdgeTable edges(m);
  std::size_t in_band = 0;
  for (const Edge& e : edges.edges()) {
    const double len = (m.vertices[e.v0] - m.vertices[e.v1]).norm();
    in_band += len >= 0.8 * l && len <= 1.33 * l;
  }
  const double band = static_cast<double>(in_band) / edges.edges().size();
  const std::vector<int> val = vertex_valences(m);
  const std::vector<char> bnd = boundary_vertices(m);
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t v = 0; v < val.size(); ++v) {
    if (!bnd[v] && val[v] > 0) {
      sum += val[v];
      ++n;
    }
  }
  const double valence = sum / n;
  const double drift =
      std::abs(enclosed_volume(m) - enclosed_volume(c.mesh)) / enclosed_volume(c.mesh);
  double residual = 0;
  for (const RemeshRound& r : rep.rounds) residual = std::max(residual, r.max_tangent_residual);
  const bool ok = band >= 0.9 && valence >= 5.8 && valence <= 6.2 && drift < 0.02 &&
                  residual < 1e-9 && secs < 10.0;
  verdict(2, "remesh quality", ok,
          printf_string("in_band=%.2f%% (>=90%%) valence=%.4f ([5.8,6.2]) volume_drift=%.3f%% "
                        "(<2%%) tangent_residual=%.2e (<1e-9) time=%.2fs (<10s)",
                        100 * band, valence, 100 * drift, residual, secs));
}

void criterion3() {
  const TriMesh plane = testing::plane_grid(50, 50, 1.0);
  OrientationOptions opt;
  opt.init = OrientationInit::kRandom;
  opt.seed = 1;
  opt.iterations = 200;
  FieldReport orep;
  const OrientationField f = optimize_orientation_field(plane, opt, &orep);
  bool monotone = orep.energy.empty() || orep.energy.front() <= orep.initial_energy + 1e-12;
  int reached = -1;
  for (std::size_t k = 0; k < orep.energy.size(); ++k) {
    if (k > 0 && orep.energy[k] > orep.energy[k - 1] + 1e-12) monotone = false;
    if (reached < 0 && orep.energy[k] < 1e-6) reached = static_cast<int>(k) + 1;
  }
  const double rho = 2.5;
  const PositionField p = optimize_position_field(plane, f, rho, 50);
  // Offsets from anchor 0 in the (o, n x o) frame must be integers.
  const Vec3 o = f.dir[0], b = f.normal[0].cross(f.dir[0]);
  double defect = 0;
  for (const Vec3& q : p.anchor) {
    const Vec3 d = q - p.anchor[0];
    for (double c : {d.dot(o) / rho, d.dot(b) / rho}) {
      defect = std::max(defect, std::abs(c - std::round(c)));
    }
  }
  const QuadDominantMesh q = extract_quads(plane, f, p);
  const std::size_t interior_tris = q.num_interior_triangles();
  const bool ok = reached > 0 && monotone && defect < 1e-4 && interior_tris == 0 &&
                  q.num_quads() > 0;
  verdict(3, "quad fields", ok,
          printf_string("energy %.3g -> %.3g, <1e-6 after %d sweeps (<=200) monotone=%s "
                        "lattice_defect=%.2e rho (<1e-4) quads=%zu interior_triangles=%zu (=0)",
                        orep.initial_energy, orep.energy.empty() ? 0.0 : orep.energy.back(),
                        reached, monotone ? "yes" : "no", defect, q.num_quads(), interior_tris));
}

void criterion4(const TriMesh& sphere) {
  // Red, green, blue and black span {r, g, b >= 0, r + g + b <= 255}; the
  // fourth barycentric weight is 1 - (r + g + b) / 255.
  const Rgba colors[4] = {{255, 0, 0, 255}, {0, 255, 0, 255}, {0, 0, 255, 255}, {0, 0, 0, 255}};
  std::vector<View> views;
  int i = 0;
  for (const Camera& cam : default_cameras(sphere, 512)) {
    views.push_back({cam, Image(512, 512, colors[i++])});
  }
  const TextureAtlas atlas = backproject(sphere, build_atlas(sphere, {.fixed_size = 1024}), views);
  const double tol = 1.5 / 255.0;  // three channels rounded to 8 bits
  double worst = 0;
  std::size_t textured = 0;
  for (std::size_t t = 0; t < atlas.state.size(); ++t) {
    if (atlas.state[t] != TexelState::kTextured) continue;
    ++textured;
    const double s = (atlas.image.pixels[4 * t] + atlas.image.pixels[4 * t + 1] +
                      atlas.image.pixels[4 * t + 2]) / 255.0;
    worst = std::max(worst, s - 1.0);
  }
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(sphere.num_faces()) - 1);
  double conf_err = 0;
  for (const View& v : views) {
    const double az = v.camera.azimuth_deg * std::numbers::pi / 180.0;
    const double el = v.camera.elevation_deg * std::numbers::pi / 180.0;
    const Vec3 d(-std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), -std::sin(el));
    const std::vector<double> conf = confidence(sphere, v.camera);
    for (int k = 0; k < 250; ++k) {
      const int f = pick(rng);
      const Vec3 a = sphere.vertices[sphere.faces[f][0]], b = sphere.vertices[sphere.faces[f][1]],
                 c = sphere.vertices[sphere.faces[f][2]];
      const Vec3 n = (b - a).cross(c - a).normalized();
      conf_err = std::max(conf_err, std::abs(conf[f] - std::clamp(-d.dot(n), 0.0, 1.0)));
    }
  }
  const bool ok = textured > 0 && worst <= tol && conf_err < 1e-6;
  verdict(4, "texturing", ok,
          printf_string("textured=%zu worst_hull_violation=%.4f (<=%.4f) "
                        "confidence_err=%.2e over 1000 faces (<1e-6)",
                        textured, std::max(worst, 0.0), tol, conf_err));
}

// Per tile, every mask pixel lies within the channel range of the known
// pixels bordering its 4-connected mask region.
std::size_t maximum_principle_violations(const OcclusionCanvas& cv, std::size_t* checked) {
  std::size_t bad = 0;
  const int w = cv.width();
  std::vector<int> label(cv.kind.size(), -1);
  for (int t = 0; t < cv.columns * cv.rows; ++t) {
    const int x0 = cv.tile_x(t), y0 = cv.tile_y(t), s = cv.tile_size;
    for (int sy = y0; sy < y0 + s; ++sy) {
      for (int sx = x0; sx < x0 + s; ++sx) {
        const std::size_t seed = static_cast<std::size_t>(sy) * w + sx;
        if (cv.kind[seed] != CanvasPixel::kMask || label[seed] >= 0) continue;
        std::vector<std::size_t> region{seed};
        label[seed] = 1;
        int lo[3] = {255, 255, 255}, hi[3] = {0, 0, 0};
        bool bounded = false;
        for (std::size_t q = 0; q < region.size(); ++q) {
          const int x = static_cast<int>(region[q] % w), y = static_cast<int>(region[q] / w);
          const int nx[4] = {x - 1, x + 1, x, x}, ny[4] = {y, y, y - 1, y + 1};
          for (int k = 0; k < 4; ++k) {
            if (nx[k] < x0 || ny[k] < y0 || nx[k] >= x0 + s || ny[k] >= y0 + s) continue;
            const std::size_t j = static_cast<std::size_t>(ny[k]) * w + nx[k];
            if (cv.kind[j] == CanvasPixel::kMask) {
              if (label[j] < 0) {
                label[j] = 1;
                region.push_back(j);
              }
            } else if (cv.kind[j] == CanvasPixel::kKnown) {
              bounded = true;
              for (int ch = 0; ch < 3; ++ch) {
                lo[ch] = std::min<int>(lo[ch], cv.image.pixels[4 * j + ch]);
                hi[ch] = std::max<int>(hi[ch], cv.image.pixels[4 * j + ch]);
              }
            }
          }
        }
        if (!bounded) continue;  // flagged, filled with the tile mean
        for (std::size_t i : region) {
          ++*checked;
          for (int ch = 0; ch < 3; ++ch) {
            const int v = cv.image.pixels[4 * i + ch];
            if (v < lo[ch] || v > hi[ch]) {
              ++bad;
              break;
            }
          }
        }
      }
    }
  }
  return bad;
}

void criterion5() {
  const TriMesh& bowl = testing::bowl_mesh();
  const Rgba colors[4] = {{220, 40, 40, 255}, {40, 220, 40, 255}, {40, 40, 220, 255},
                          {220, 220, 40, 255}};
  std::vector<View> views;
  int i = 0;
  for (const Camera& cam : default_cameras(bowl, 512)) {
    views.push_back({cam, Image(512, 512, colors[i++])});
  }
  const TextureAtlas coarse = backproject(bowl, build_atlas(bowl, {.fixed_size = 1024}), views);
  // Faces with no textured texel at all are invisible from every view.
  const std::vector<double> cov = face_coverage(coarse);
  const double invisible =
      static_cast<double>(std::count(cov.begin(), cov.end(), 0.0)) / bowl.num_faces();
  OcclusionReport rep;
  OcclusionCanvas canvas;
  InpaintParams params;
  params.k = 6;
  const TextureAtlas done = inpaint_occlusions(bowl, coarse, params, &rep, &canvas);
  const std::size_t untextured = done.count(TexelState::kUntextured);
  std::size_t changed = 0;
  for (std::size_t t = 0; t < coarse.state.size(); ++t) {
    if (coarse.state[t] != TexelState::kTextured) continue;
    for (int ch = 0; ch < 4; ++ch) {
      changed += done.image.pixels[4 * t + ch] != coarse.image.pixels[4 * t + ch];
    }
  }
  bool monotone = true;
  for (std::size_t k = 1; k < rep.clustering.inertia.size(); ++k) {
    monotone = monotone && rep.clustering.inertia[k] <= rep.clustering.inertia[k - 1];
  }
  std::size_t checked = 0;
  const std::size_t violations = maximum_principle_violations(canvas, &checked);
  const bool ok = invisible >= 0.1 && untextured == 0 && changed == 0 && monotone &&
                  violations == 0 && checked > 0 && rep.clustering.used_k == 6;
  verdict(5, "occlusion completeness", ok,
          printf_string("invisible_faces=%.1f%% (>=10%%) k=%d untextured_after=%zu (=0) "
                        "changed_known_channels=%zu (=0) inertia_monotone=%s rounds=%d "
                        "max_principle_violations=%zu/%zu px (=0)",
                        100 * invisible, rep.clustering.used_k, untextured, changed,
                        monotone ? "yes" : "no", rep.clustering.rounds, violations, checked));
}

void criterion6() {
  const int n = 4, c = 8, w = 16, h = 16, f = 3, d = c / 2;
  std::size_t leaks = 0, shape_errors = 0, changed_regions = 0;
  double single_err = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    std::normal_distribution<double> g;
    FeatureTensor hidden(c, w, h);
    for (double& v : hidden.data) v = g(rng);
    auto tokens = [&] {
      Eigen::MatrixXd m(f, d);
      for (int r = 0; r < f; ++r) {
        for (int k = 0; k < d; ++k) m(r, k) = g(rng);
      }
      return m;
    };
    GuidanceSet guide;
    for (int i = 0; i < n; ++i) guide.views.push_back({tokens(), tokens()});
    const AttentionWeights wts = AttentionWeights::random(d, 5000 + trial);
    const RegionLayout layout = default_layout(n, w, h);
    const FeatureTensor rep = replicate_hidden(hidden, n);
    const Eigen::MatrixXd gt = assemble_guidance(guide);
    shape_errors += rep.channels != c * n || rep.width != w || rep.height != h;
    shape_errors += gt.rows() != c * n || gt.cols() != f;
    const FeatureTensor base = decoupled_pass(hidden, guide, layout, wts);
    shape_errors += base.channels != c || base.width != w || base.height != h;
    for (int j = 0; j < n; ++j) {
      GuidanceSet p = guide;
      p.views[j] = {tokens() * 10.0, tokens() * 10.0};
      const FeatureTensor out = decoupled_pass(hidden, p, layout, wts);
      bool inside = false;
      for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const bool differs = out.at(ch, x, y) != base.at(ch, x, y);
            if (layout.region_at(x, y) == j) {
              inside = inside || differs;
            } else {
              leaks += differs;
            }
          }
        }
      }
      changed_regions += inside;
    }
    // N = 1 against a scalar evaluation of softmax(QK^T / sqrt(d)) V.
    GuidanceSet one;
    one.views.push_back(guide.views[0]);
    const FeatureTensor single = decoupled_pass(hidden, one, default_layout(1, w, h), wts);
    for (int side = 0; side < 2; ++side) {
      const Eigen::MatrixXd& ctx = side ? one.views[0].negative : one.views[0].positive;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          double q[8] = {0}, score[8] = {0}, top = -1e300, z = 0;
          for (int j = 0; j < d; ++j) {
            for (int i = 0; i < d; ++i) q[j] += hidden.at(side * d + i, x, y) * wts.query(i, j);
          }
          for (int t = 0; t < f; ++t) {
            for (int j = 0; j < d; ++j) {
              double k = 0;
              for (int i = 0; i < d; ++i) k += ctx(t, i) * wts.key(i, j);
              score[t] += q[j] * k / std::sqrt(static_cast<double>(d));
            }
            top = std::max(top, score[t]);
          }
          for (int t = 0; t < f; ++t) z += (score[t] = std::exp(score[t] - top));
          for (int j = 0; j < d; ++j) {
            double out = 0;
            for (int t = 0; t < f; ++t) {
              double v = 0;
              for (int i = 0; i < d; ++i) v += ctx(t, i) * wts.value(i, j);
              out += score[t] / z * v;
            }
            single_err = std::max(single_err, std::abs(out - single.at(side * d + j, x, y)));
          }
        }
      }
    }
  }
  const bool ok = leaks == 0 && shape_errors == 0 && single_err < 1e-12 && changed_regions == 400;
  verdict(6, "attention locality", ok,
          printf_string("trials=100 leaked_values=%zu (=0) perturbed_regions_changed=%zu/400 "
                        "single_view_err=%.2e (<1e-12) shape_errors=%zu (=0)",
                        leaks, changed_regions, single_err, shape_errors));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> sphere_config(const fs::path& out) {
  return {{"field.analytic", "sphere(0.5,0.5,0.5,0.3)"},
          {"field.dims", "64"},
          {"views.generator", "solid"},
          {"cameras.resolution", "512"},
          {"atlas.size", "1024"},
          {"output.directory", out.string()},
          {"output.name", "sphere"},
          {"run.seed", "1"}};
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "texmesh_acceptance";
  fs::remove_all(work);
  try {
    const SphereCarve sphere = carve_sphere();
    criterion1(sphere);
    criterion2(sphere);
    criterion3();
    RemeshParams rp;
    rp.target_edge_length = 0.03;
    criterion4(isotropic_remesh(sphere.mesh, rp));
    criterion5();
    criterion6();

    const PipelineResult first = cmd_pipeline(make_config(sphere_config(work / "run1")));
    const PipelineResult second = cmd_pipeline(make_config(sphere_config(work / "run2")));
    std::size_t compared = 0, differing = 0;
    for (const char* f : {"sphere.obj", "sphere_textured.obj", "sphere_textured.mtl",
                          "sphere_textured.png", "carve_stats.txt", "paint_stats.txt"}) {
      ++compared;
      const std::string a = slurp(work / "run1" / f);
      differing += a.empty() || a != slurp(work / "run2" / f);
    }
    verdict(7, "determinism", differing == 0,
            printf_string("files_compared=%zu differing=%zu (=0)", compared, differing));
    const double coverage = first.paint.stats.number("final.coverage");
    verdict(8, "end-to-end budget", first.seconds < 60.0 && coverage == 1.0,
            printf_string("64^3 grid, 512^2 views, 1024^2 atlas: %.2fs (<60s) on %d worker(s), "
                          "coverage=%.6f",
                          first.seconds, worker_count(), coverage));
    (void)second;
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    fs::remove_all(work);
    return 1;
  }
  fs::remove_all(work);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

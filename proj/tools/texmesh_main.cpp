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

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "texmesh/pipeline.hpp"

namespace {

using texmesh::PipelineConfig;

constexpr int kValidationError = 2;
constexpr int kProcessingError = 1;

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  int workers = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    cmd->add_option("-j,--workers", workers, "worker threads (same as --run.workers)")
        ->check(CLI::Range(1, 256));
    for (const auto& key : texmesh::config_keys()) {
      std::string help = key.help;
      if (!key.default_value.empty()) help += " [" + key.default_value + "]";
      cmd->add_option("--" + key.name, values[key.name], help);
    }
  }

  PipelineConfig resolve() const {
    std::map<std::string, std::string> overrides;
    for (const auto& [k, v] : values) {
      if (!v.empty()) overrides[k] = v;
    }
    if (workers > 0) overrides["run.workers"] = std::to_string(workers);
    if (config_path.empty()) return texmesh::make_config(overrides);
    return texmesh::load_config(config_path, overrides);
  }
};

void report(const std::vector<std::string>& files, double seconds) {
  for (const std::string& f : files) std::cout << "wrote " << f << "\n";
  std::printf("seconds=%.3f\n", seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carve meshes from occupancy fields and paint them from views"};
  app.require_subcommand(1);

  auto* carve = app.add_subcommand("carve", "field -> marching cubes -> clean -> remesh -> OBJ");
  auto* remesh = app.add_subcommand("remesh", "remesh input.mesh (tri or quad)");
  auto* paint = app.add_subcommand("paint", "texture input.mesh from four views");
  auto* inpaint =
      app.add_subcommand("inpaint", "fill untextured texels of input.mesh + input.texture");
  auto* pipeline = app.add_subcommand("pipeline", "carve then paint");
  auto* attend = app.add_subcommand("attend-demo", "decoupled cross attention on random inputs");

  ConfigFlags carve_flags, remesh_flags, paint_flags, inpaint_flags, pipeline_flags;
  carve_flags.attach(carve);
  remesh_flags.attach(remesh);
  paint_flags.attach(paint);
  inpaint_flags.attach(inpaint);
  pipeline_flags.attach(pipeline);

  texmesh::AttendDemoParams demo;
  attend->add_option("--views", demo.views, "number of views N")->capture_default_str();
  attend->add_option("--channels", demo.channels, "hidden channels C (even)")->capture_default_str();
  attend->add_option("--width", demo.width, "canvas width")->capture_default_str();
  attend->add_option("--height", demo.height, "canvas height")->capture_default_str();
  attend->add_option("--tokens", demo.tokens, "guidance tokens F")->capture_default_str();
  attend->add_option("--seed", demo.seed, "random seed")->capture_default_str();
  attend->add_option("-o,--out", demo.output_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationError;
  }

  try {
    if (carve->parsed()) {
      const auto r = texmesh::cmd_carve(carve_flags.resolve());
      report(r.files, r.seconds);
    } else if (remesh->parsed()) {
      const auto r = texmesh::cmd_remesh(remesh_flags.resolve());
      report(r.files, r.seconds);
    } else if (paint->parsed()) {
      const auto r = texmesh::cmd_paint(paint_flags.resolve());
      report(r.files, r.seconds);
      std::cout << "coverage=" << r.stats.get("final.coverage") << "\n";
    } else if (inpaint->parsed()) {
      const auto r = texmesh::cmd_inpaint(inpaint_flags.resolve());
      report(r.files, r.seconds);
      std::cout << "coverage=" << r.stats.get("final.coverage") << "\n";
    } else if (pipeline->parsed()) {
      const auto r = texmesh::cmd_pipeline(pipeline_flags.resolve());
      report(r.carve.files, r.carve.seconds);
      report(r.paint.files, r.paint.seconds);
      std::printf("total.seconds=%.3f\n", r.seconds);
      std::cout << "coverage=" << r.paint.stats.get("final.coverage") << "\n";
    } else if (attend->parsed()) {
      std::cout << texmesh::cmd_attend_demo(demo).to_text();
    }
  } catch (const texmesh::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const texmesh::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kProcessingError;
  }
  return 0;
}

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

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>

#include "texmesh/attend.hpp"
#include "texmesh/carve.hpp"
#include "texmesh/field.hpp"
#include "texmesh/io.hpp"
#include "texmesh/mesh.hpp"
#include "texmesh/pipeline.hpp"
#include "texmesh/remesh_tri.hpp"

namespace py = pybind11;
using namespace texmesh;

namespace {

using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

py::tuple to_arrays(const TriMesh& m) {
  Vertices v(m.num_vertices(), 3);
  Faces f(m.num_faces(), 3);
  for (std::size_t i = 0; i < m.num_vertices(); ++i) v.row(i) = m.vertices[i].transpose();
  for (std::size_t i = 0; i < m.num_faces(); ++i) {
    for (int k = 0; k < 3; ++k) f(i, k) = m.faces[i][k];
  }
  return py::make_tuple(v, f);
}

TriMesh from_arrays(const Vertices& v, const Faces& f) {
  TriMesh m;
  for (Eigen::Index i = 0; i < v.rows(); ++i) m.vertices.push_back(v.row(i).transpose());
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (f(i, k) < 0 || f(i, k) >= v.rows()) throw InvalidArgument("face index out of range");
    }
    m.faces.push_back({f(i, 0), f(i, 1), f(i, 2)});
  }
  return m;
}

std::map<std::string, std::string> stats_dict(const Stats& s) {
  return {s.entries().begin(), s.entries().end()};
}

FeatureTensor to_tensor(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3) throw InvalidArgument("hidden must have shape (channels, height, width)");
  FeatureTensor t(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(2)),
                  static_cast<int>(a.shape(1)));
  auto r = a.unchecked<3>();
  for (int c = 0; c < t.channels; ++c) {
    for (int y = 0; y < t.height; ++y) {
      for (int x = 0; x < t.width; ++x) t.at(c, x, y) = r(c, y, x);
    }
  }
  return t;
}

py::array_t<double> from_tensor(const FeatureTensor& t) {
  py::array_t<double> a({t.channels, t.height, t.width});
  auto w = a.mutable_unchecked<3>();
  for (int c = 0; c < t.channels; ++c) {
    for (int y = 0; y < t.height; ++y) {
      for (int x = 0; x < t.width; ++x) w(c, y, x) = t.at(c, x, y);
    }
  }
  return a;
}

}  // namespace

PYBIND11_MODULE(_texmesh, m) {
  m.doc() = "Occupancy carving, remeshing and multi-view texturing.";

  // Translators are tried newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("set_worker_count", &set_worker_count, py::arg("workers"));

  m.def(
      "carve",
      [](const std::string& expr, int dims, double iso) {
        if (dims < 2) throw InvalidArgument("dims must be at least 2");
        const double h = 1.0 / (dims - 1);
        const GridField g =
            sample_grid(AnalyticField::parse(expr), {dims, dims, dims}, Vec3::Zero(), h);
        return to_arrays(clean(marching_cubes(g, iso)));
      },
      py::arg("expr"), py::arg("dims") = 64, py::arg("iso") = 0.5,
      "Samples a CSG expression on the unit cube and returns (vertices, faces).");

  m.def(
      "remesh",
      [](const Vertices& v, const Faces& f, double target_edge_length, int iterations) {
        RemeshParams p;
        p.target_edge_length = target_edge_length;
        p.iterations = iterations;
        return to_arrays(isotropic_remesh(from_arrays(v, f), p));
      },
      py::arg("vertices"), py::arg("faces"), py::arg("target_edge_length"),
      py::arg("iterations") = 5);

  m.def(
      "mesh_summary",
      [](const Vertices& v, const Faces& f) {
        const TriMesh mesh = from_arrays(v, f);
        const EdgeTable edges(mesh);
        py::dict d;
        d["closed_manifold"] = edges.is_closed_manifold();
        d["euler"] = euler_characteristic(mesh, edges);
        d["volume"] = enclosed_volume(mesh);
        d["area"] = surface_area(mesh);
        return d;
      },
      py::arg("vertices"), py::arg("faces"));

  m.def(
      "read_obj",
      [](const std::string& path) { return to_arrays(to_trimesh(read_obj(path))); },
      py::arg("path"));
  m.def(
      "write_obj",
      [](const std::string& path, const Vertices& v, const Faces& f) {
        write_obj(path, to_obj(from_arrays(v, f)));
      },
      py::arg("path"), py::arg("vertices"), py::arg("faces"));

  m.def(
      "run_pipeline",
      [](const std::map<std::string, std::string>& config) {
        PipelineResult r;
        {
          py::gil_scoped_release release;
          r = cmd_pipeline(make_config(config));
        }
        py::dict d;
        d["carve"] = stats_dict(r.carve.stats);
        d["paint"] = stats_dict(r.paint.stats);
        d["files"] = r.carve.files;
        py::list files = d["files"];
        for (const auto& f : r.paint.files) files.append(f);
        d["seconds"] = r.seconds;
        return d;
      },
      py::arg("config"),
      "Runs carve and paint from a {'section.key': value} mapping; returns stats.");

  m.def(
      "decoupled_pass",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& hidden,
         const std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>>& guidance,
         std::uint64_t seed) {
        const FeatureTensor h = to_tensor(hidden);
        GuidanceSet g;
        for (const auto& [pos, neg] : guidance) g.views.push_back({pos, neg});
        const int n = static_cast<int>(g.views.size());
        const AttentionWeights w = AttentionWeights::random(h.channels / 2, seed);
        return from_tensor(decoupled_pass(h, g, default_layout(n, h.width, h.height), w));
      },
      py::arg("hidden"), py::arg("guidance"), py::arg("seed") = 1,
      "hidden is (C, H, W); guidance is a list of (positive, negative) token "
      "matrices of shape (F, C/2), one per view.");

  m.def(
      "region_map",
      [](int views, int width, int height) {
        const RegionLayout l = default_layout(views, width, height);
        py::array_t<int> a({height, width});
        auto w = a.mutable_unchecked<2>();
        for (int y = 0; y < height; ++y) {
          for (int x = 0; x < width; ++x) w(y, x) = l.region_at(x, y);
        }
        return a;
      },
      py::arg("views"), py::arg("width"), py::arg("height"));
}

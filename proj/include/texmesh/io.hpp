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

#include <iosfwd>
#include <string>
#include <vector>

#include "texmesh/field.hpp"
#include "texmesh/image.hpp"
#include "texmesh/mesh.hpp"

namespace texmesh {

struct QuadDominantMesh;
struct TextureAtlas;

// Wavefront OBJ contents. Indices are 0-based; `face_uvs` is either empty or
// parallel to `faces`, with an empty entry for faces without texture indices.
struct ObjDocument {
  std::vector<Vec3> vertices;
  std::vector<Vec2> uvs;
  std::vector<std::vector<int>> faces;
  std::vector<std::vector<int>> face_uvs;
  std::vector<std::string> comments;  // without the leading '#'
  std::string material_library;
  std::string material;

  bool has_uvs() const;
  std::size_t num_triangles() const;
  std::size_t num_quads() const;
};

// Throws ParseError with the offending line number.
ObjDocument parse_obj(std::istream& in);
ObjDocument read_obj(const std::string& path);
// Six decimal places, fixed record order; identical input gives identical bytes.
std::string format_obj(const ObjDocument& doc);
void write_obj(const std::string& path, const ObjDocument& doc);

ObjDocument to_obj(const TriMesh& mesh);
ObjDocument to_obj(const QuadDominantMesh& mesh);
// One vt triple per face from the atlas blocks.
ObjDocument to_obj(const TriMesh& mesh, const TextureAtlas& atlas);

// Polygons are fan triangulated from their first corner.
TriMesh to_trimesh(const ObjDocument& doc);

// Writes <stem>.obj, <stem>.mtl and <stem>.png side by side; returns their paths.
struct TexturedPaths {
  std::string obj;
  std::string mtl;
  std::string png;
};
TexturedPaths write_textured_obj(const std::string& obj_path, const TriMesh& mesh,
                                 const TextureAtlas& atlas, int dilation = 2);

// RGBA8; any PNG colour type is converted on read. Writes are non-interlaced.
Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& image);

// "CAPAVOX1 nx ny nz ox oy oz spacing\n" then nx*ny*nz little-endian float32,
// x fastest.
GridField parse_vox(std::istream& in);
GridField read_vox(const std::string& path);
void write_vox(const std::string& path, const GridField& grid);

}  // namespace texmesh

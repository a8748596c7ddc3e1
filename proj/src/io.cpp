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

#include "texmesh/io.hpp"

#include <png.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "texmesh/paint.hpp"
#include "texmesh/remesh_quad.hpp"

namespace texmesh {
namespace {

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

double to_double(std::string_view s, int line) {
  double v = 0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("bad number '" + std::string(s) + "'", line);
  }
  return v;
}

long to_long(std::string_view s, int line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("bad index '" + std::string(s) + "'", line);
  }
  return v;
}

// OBJ indices are 1-based; negative ones count back from the last element.
int resolve(long raw, std::size_t count, const char* what, int line) {
  long idx = raw > 0 ? raw - 1 : static_cast<long>(count) + raw;
  if (raw == 0 || idx < 0 || idx >= static_cast<long>(count)) {
    throw ParseError(std::string(what) + " index " + std::to_string(raw) + " out of range", line);
  }
  return static_cast<int>(idx);
}

void put(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  if (std::strcmp(buf, "-0.000000") == 0) std::strcpy(buf, "0.000000");
  out += buf;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

}  // namespace

bool ObjDocument::has_uvs() const {
  for (const auto& f : face_uvs) {
    if (!f.empty()) return true;
  }
  return false;
}

std::size_t ObjDocument::num_triangles() const {
  std::size_t n = 0;
  for (const auto& f : faces) n += f.size() == 3;
  return n;
}

std::size_t ObjDocument::num_quads() const {
  std::size_t n = 0;
  for (const auto& f : faces) n += f.size() == 4;
  return n;
}

ObjDocument parse_obj(std::istream& in) {
  ObjDocument doc;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s(raw);
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    const std::size_t first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    s.remove_prefix(first);
    if (s.front() == '#') {
      std::string_view c = s.substr(1);
      if (!c.empty() && c.front() == ' ') c.remove_prefix(1);
      doc.comments.emplace_back(c);
      continue;
    }
    const auto tok = split(s);
    const std::string_view key = tok[0];
    if (key == "v") {
      if (tok.size() < 4) throw ParseError("vertex needs 3 coordinates", line);
      doc.vertices.emplace_back(to_double(tok[1], line), to_double(tok[2], line),
                                to_double(tok[3], line));
    } else if (key == "vt") {
      if (tok.size() < 2) throw ParseError("texture coordinate needs a value", line);
      doc.uvs.emplace_back(to_double(tok[1], line), tok.size() > 2 ? to_double(tok[2], line) : 0.0);
    } else if (key == "f") {
      if (tok.size() < 4) throw ParseError("face needs at least 3 corners", line);
      std::vector<int> face, uv;
      for (std::size_t k = 1; k < tok.size(); ++k) {
        const std::string_view t = tok[k];
        const std::size_t a = t.find('/');
        face.push_back(resolve(to_long(t.substr(0, a), line), doc.vertices.size(), "vertex", line));
        if (a != std::string_view::npos) {
          const std::size_t b = t.find('/', a + 1);
          const std::string_view vt = t.substr(a + 1, b == std::string_view::npos ? b : b - a - 1);
          if (!vt.empty()) uv.push_back(resolve(to_long(vt, line), doc.uvs.size(), "texture", line));
        }
      }
      if (!uv.empty() && uv.size() != face.size()) {
        throw ParseError("face mixes corners with and without texture indices", line);
      }
      for (std::size_t i = 0; i < face.size(); ++i) {
        for (std::size_t j = i + 1; j < face.size(); ++j) {
          if (face[i] == face[j]) throw ParseError("face repeats a vertex", line);
        }
      }
      doc.faces.push_back(std::move(face));
      doc.face_uvs.push_back(std::move(uv));
    } else if (key == "mtllib") {
      if (tok.size() < 2) throw ParseError("mtllib needs a file name", line);
      doc.material_library = std::string(tok[1]);
    } else if (key == "usemtl") {
      if (tok.size() < 2) throw ParseError("usemtl needs a material name", line);
      doc.material = std::string(tok[1]);
    }
    // vn, o, g, s, l, p and unknown records carry nothing we use.
  }
  if (in.bad()) throw IoError("read error");
  if (!doc.has_uvs()) doc.face_uvs.clear();
  return doc;
}

ObjDocument read_obj(const std::string& path) {
  std::ifstream in = open_in(path);
  return parse_obj(in);
}

std::string format_obj(const ObjDocument& doc) {
  std::string out = "# texmesh\n";
  for (const std::string& c : doc.comments) {
    if (c == "texmesh") continue;
    out += "# " + c + "\n";
  }
  if (!doc.material_library.empty()) out += "mtllib " + doc.material_library + "\n";
  for (const Vec3& v : doc.vertices) {
    out += "v ";
    put(out, v.x());
    out += ' ';
    put(out, v.y());
    out += ' ';
    put(out, v.z());
    out += '\n';
  }
  for (const Vec2& t : doc.uvs) {
    out += "vt ";
    put(out, t.x());
    out += ' ';
    put(out, t.y());
    out += '\n';
  }
  if (!doc.material.empty()) out += "usemtl " + doc.material + "\n";
  const bool uv = doc.has_uvs();
  for (std::size_t f = 0; f < doc.faces.size(); ++f) {
    out += 'f';
    for (std::size_t k = 0; k < doc.faces[f].size(); ++k) {
      out += ' ' + std::to_string(doc.faces[f][k] + 1);
      if (uv && !doc.face_uvs[f].empty()) out += '/' + std::to_string(doc.face_uvs[f][k] + 1);
    }
    out += '\n';
  }
  return out;
}

void write_obj(const std::string& path, const ObjDocument& doc) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  out << format_obj(doc);
  if (!out) throw IoError("write to '" + path + "' failed");
}

ObjDocument to_obj(const TriMesh& mesh) {
  ObjDocument doc;
  doc.vertices = mesh.vertices;
  for (const Face& f : mesh.faces) doc.faces.push_back({f[0], f[1], f[2]});
  return doc;
}

ObjDocument to_obj(const QuadDominantMesh& mesh) {
  ObjDocument doc;
  doc.vertices = mesh.vertices;
  doc.faces = mesh.faces;
  return doc;
}

ObjDocument to_obj(const TriMesh& mesh, const TextureAtlas& atlas) {
  if (atlas.blocks.size() != mesh.num_faces()) {
    throw InvalidArgument("atlas has " + std::to_string(atlas.blocks.size()) +
                          " blocks for " + std::to_string(mesh.num_faces()) + " faces");
  }
  ObjDocument doc = to_obj(mesh);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    std::vector<int> corners;
    for (int k = 0; k < 3; ++k) {
      corners.push_back(static_cast<int>(doc.uvs.size()));
      doc.uvs.push_back(atlas.uv(static_cast<int>(f), k));
    }
    doc.face_uvs.push_back(std::move(corners));
  }
  return doc;
}

TriMesh to_trimesh(const ObjDocument& doc) {
  TriMesh mesh;
  mesh.vertices = doc.vertices;
  for (const auto& f : doc.faces) {
    for (std::size_t k = 1; k + 1 < f.size(); ++k) mesh.faces.push_back({f[0], f[k], f[k + 1]});
  }
  return mesh;
}

TexturedPaths write_textured_obj(const std::string& obj_path, const TriMesh& mesh,
                                 const TextureAtlas& atlas, int dilation) {
  namespace fs = std::filesystem;
  const fs::path obj(obj_path);
  TexturedPaths paths{obj.string(), fs::path(obj).replace_extension(".mtl").string(),
                      fs::path(obj).replace_extension(".png").string()};
  const std::string stem = obj.stem().string();
  ObjDocument doc = to_obj(mesh, atlas);
  doc.material_library = stem + ".mtl";
  doc.material = "texture";
  write_png(paths.png, export_image(atlas, dilation));
  {
    std::ofstream mtl = open_out(paths.mtl, std::ios::out | std::ios::binary);
    mtl << "# texmesh\nnewmtl texture\nKa 1.000000 1.000000 1.000000\n"
           "Kd 1.000000 1.000000 1.000000\nKs 0.000000 0.000000 0.000000\nillum 1\nmap_Kd "
        << stem << ".png\n";
    if (!mtl) throw IoError("write to '" + paths.mtl + "' failed");
  }
  write_obj(paths.obj, doc);
  return paths;
}

Image read_png(const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    const std::string msg = png.message;
    png_image_free(&png);
    if (!std::filesystem::exists(path)) throw IoError("cannot open '" + path + "'");
    throw ParseError("'" + path + "': " + msg, 0);
  }
  png.format = PNG_FORMAT_RGBA;
  Image img;
  img.width = static_cast<int>(png.width);
  img.height = static_cast<int>(png.height);
  img.pixels.assign(PNG_IMAGE_SIZE(png), 0);
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw ParseError("'" + path + "': " + msg, 0);
  }
  return img;
}

void write_png(const std::string& path, const Image& image) {
  if (image.empty() ||
      image.pixels.size() != 4 * static_cast<std::size_t>(image.width) * image.height) {
    throw InvalidArgument("cannot write an empty or inconsistent image");
  }
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGBA;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot write '" + path + "': " + msg);
  }
}

GridField parse_vox(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("missing CAPAVOX1 header", 1);
  const auto tok = split(header);
  if (tok.size() != 8 || tok[0] != "CAPAVOX1") {
    throw ParseError("expected 'CAPAVOX1 nx ny nz ox oy oz spacing'", 1);
  }
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    const long d = to_long(tok[1 + a], 1);
    if (d < 1 || d > (1 << 16)) throw ParseError("grid dimension out of range", 1);
    dims[a] = static_cast<int>(d);
  }
  const Vec3 origin(to_double(tok[4], 1), to_double(tok[5], 1), to_double(tok[6], 1));
  const double spacing = to_double(tok[7], 1);
  const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  std::vector<float> values(n);
  static_assert(sizeof(float) == 4);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(4 * n));
  if (static_cast<std::size_t>(in.gcount()) != 4 * n) {
    throw ParseError("expected " + std::to_string(n) + " float32 values, got " +
                         std::to_string(in.gcount() / 4),
                     2);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing data after values", 2);
  if constexpr (std::endian::native == std::endian::big) {
    for (float& v : values) v = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(v)));
  }
  try {
    return GridField(dims, origin, spacing, std::move(values));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 2);
  }
}

GridField read_vox(const std::string& path) {
  std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
  return parse_vox(in);
}

void write_vox(const std::string& path, const GridField& grid) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
  char buf[256];
  const auto& d = grid.dims();
  std::snprintf(buf, sizeof buf, "CAPAVOX1 %d %d %d %.17g %.17g %.17g %.17g\n", d[0], d[1], d[2],
                grid.origin().x(), grid.origin().y(), grid.origin().z(), grid.spacing());
  out << buf;
  std::vector<float> values = grid.values();
  if constexpr (std::endian::native == std::endian::big) {
    for (float& v : values) v = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(v)));
  }
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(4 * values.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace texmesh

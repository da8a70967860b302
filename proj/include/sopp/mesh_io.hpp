#ifndef SOPP_MESH_IO_HPP_
#define SOPP_MESH_IO_HPP_

#include <array>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sopp/mesh.hpp"

namespace sopp {

namespace detail {

// STL files repeat vertices per facet; collapse exact duplicates so the
// indexed mesh has shared vertices.
class VertexDedup {
 public:
  std::uint32_t intern(const Vec3& v) {
    std::array<double, 3> key{v.x(), v.y(), v.z()};
    auto it = map_.find(key);
    if (it != map_.end()) return it->second;
    const auto idx = static_cast<std::uint32_t>(vertices_.size());
    vertices_.push_back(v);
    map_.emplace(key, idx);
    return idx;
  }

  std::vector<Vec3> take() { return std::move(vertices_); }

 private:
  std::vector<Vec3> vertices_;
  std::map<std::array<double, 3>, std::uint32_t> map_;
};

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

inline TriangleMesh load_stl_ascii(std::istream& in, const std::string& name) {
  detail::VertexDedup dedup;
  std::vector<TriangleMesh::Triangle> tris;
  std::string tok;
  std::vector<Vec3> loop;
  while (in >> tok) {
    std::string t = detail::lower(tok);
    if (t == "vertex") {
      Vec3 v;
      if (!(in >> v.x() >> v.y() >> v.z())) {
        throw std::runtime_error(name + ": malformed STL vertex");
      }
      loop.push_back(v);
    } else if (t == "endloop") {
      if (loop.size() != 3) {
        throw std::runtime_error(name + ": STL facet is not a triangle");
      }
      tris.push_back({dedup.intern(loop[0]), dedup.intern(loop[1]),
                      dedup.intern(loop[2])});
      loop.clear();
    }
  }
  if (!loop.empty()) throw std::runtime_error(name + ": truncated STL facet");
  return TriangleMesh(dedup.take(), std::move(tris));
}

inline TriangleMesh load_stl_binary(std::istream& in, const std::string& name) {
  char header[80];
  in.read(header, 80);
  const auto count = io::read_le<std::uint32_t>(in);
  if (!in) throw std::runtime_error(name + ": truncated binary STL header");
  detail::VertexDedup dedup;
  std::vector<TriangleMesh::Triangle> tris;
  tris.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    // normal is re-derived from winding, skip the stored one
    for (int k = 0; k < 3; ++k) io::read_le<float>(in);
    TriangleMesh::Triangle t;
    for (int v = 0; v < 3; ++v) {
      const float x = io::read_le<float>(in);
      const float y = io::read_le<float>(in);
      const float z = io::read_le<float>(in);
      t[static_cast<std::size_t>(v)] = dedup.intern(Vec3(x, y, z));
    }
    tris.push_back(t);
    io::read_le<std::uint16_t>(in);  // attribute byte count
    if (!in) throw std::runtime_error(name + ": truncated binary STL facet");
  }
  return TriangleMesh(dedup.take(), std::move(tris));
}

inline TriangleMesh load_stl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path.string());
  const auto size = std::filesystem::file_size(path);
  // A binary STL is exactly 84 + 50 * count bytes; the "solid" prefix alone
  // is unreliable because some binary exporters write it too.
  bool binary = false;
  if (size >= 84) {
    in.seekg(80);
    const auto count = io::read_le<std::uint32_t>(in);
    binary = size == 84 + static_cast<std::uintmax_t>(count) * 50;
  }
  in.seekg(0);
  return binary ? load_stl_binary(in, path.string())
                : load_stl_ascii(in, path.string());
}

inline TriangleMesh load_obj(std::istream& in, const std::string& name) {
  std::vector<Vec3> vertices;
  std::vector<TriangleMesh::Triangle> tris;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) {
        throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                 ": malformed vertex");
      }
      vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> face;
      std::string ref;
      while (ls >> ref) {
        // formats: "i", "i/j", "i//k", "i/j/k"; only the vertex index matters
        const std::string first = ref.substr(0, ref.find('/'));
        long idx = 0;
        try {
          idx = std::stol(first);
        } catch (const std::exception&) {
          throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                   ": malformed face index '" + ref + "'");
        }
        if (idx < 0) idx += static_cast<long>(vertices.size()) + 1;
        if (idx < 1 || idx > static_cast<long>(vertices.size())) {
          throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                   ": face index out of range");
        }
        face.push_back(static_cast<std::uint32_t>(idx - 1));
      }
      if (face.size() != 3) {
        throw std::runtime_error(
            name + ":" + std::to_string(lineno) +
            ": only triangulated faces are supported (got " +
            std::to_string(face.size()) + " vertices)");
      }
      tris.push_back({face[0], face[1], face[2]});
    }
    // vn / vt / o / g / usemtl etc. are ignored
  }
  return TriangleMesh(std::move(vertices), std::move(tris));
}

inline TriangleMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path.string());
  return load_obj(in, path.string());
}

// Dispatches on the file extension (.stl or .obj, case-insensitive).
inline TriangleMesh load_mesh(const std::filesystem::path& path) {
  const std::string ext = detail::lower(path.extension().string());
  if (ext == ".stl") return load_stl(path);
  if (ext == ".obj") return load_obj(path);
  throw std::runtime_error("unsupported mesh format: " + path.string());
}

inline void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path.string());
  out.precision(17);
  for (const Vec3& v : mesh.vertices()) {
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (const auto& t : mesh.triangles()) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

inline void save_stl_binary(const TriangleMesh& mesh,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path.string());
  char header[80] = {};
  out.write(header, 80);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(mesh.triangle_count()));
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3& n = mesh.normal(t);
    for (int k = 0; k < 3; ++k) io::write_le<float>(out, static_cast<float>(n[k]));
    for (int c = 0; c < 3; ++c) {
      const Vec3& v = mesh.corner(t, c);
      for (int k = 0; k < 3; ++k) io::write_le<float>(out, static_cast<float>(v[k]));
    }
    io::write_le<std::uint16_t>(out, 0);
  }
}

}  // namespace sopp

#endif  // SOPP_MESH_IO_HPP_

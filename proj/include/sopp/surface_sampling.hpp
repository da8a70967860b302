#ifndef SOPP_SURFACE_SAMPLING_HPP_
#define SOPP_SURFACE_SAMPLING_HPP_

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sopp/mesh.hpp"

namespace sopp {

// A surface sample: position on the mesh, outward unit normal of the source
// triangle, and that triangle's index.
struct ModelPoint {
  Vec3 position;
  Vec3 normal;
  std::uint32_t source_triangle;
};

// Area-weighted uniform sampling of the mesh surface. Triangles are chosen
// proportionally to area via the cumulative-area table; the point inside a
// triangle comes from two uniform variates with the reflection trick, which
// keeps the in-triangle density uniform.
inline std::vector<ModelPoint> sample_surface(const TriangleMesh& mesh,
                                              std::size_t count,
                                              std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample_surface: count must be >= 1");
  if (!(mesh.total_area() > 0.0)) {
    throw std::runtime_error("sample_surface: mesh has zero surface area");
  }

  std::vector<double> cumulative;
  cumulative.reserve(mesh.triangle_count());
  double acc = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    acc += mesh.area(t);  // degenerate triangles add zero width
    cumulative.push_back(acc);
  }

  Rng rng(seed);
  std::vector<ModelPoint> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = rng.uniform() * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    std::size_t tri = static_cast<std::size_t>(it - cumulative.begin());
    if (tri >= mesh.triangle_count()) tri = mesh.triangle_count() - 1;

    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3& a = mesh.corner(tri, 0);
    const Vec3& b = mesh.corner(tri, 1);
    const Vec3& c = mesh.corner(tri, 2);
    points.push_back(ModelPoint{a + u * (b - a) + v * (c - a), mesh.normal(tri),
                                static_cast<std::uint32_t>(tri)});
  }
  return points;
}

}  // namespace sopp

#endif  // SOPP_SURFACE_SAMPLING_HPP_

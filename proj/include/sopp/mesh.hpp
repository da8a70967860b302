#ifndef SOPP_MESH_HPP_
#define SOPP_MESH_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sopp/common.hpp"

namespace sopp {

// Indexed triangle mesh, coordinates in meters. Normals and areas are derived
// from vertex positions and triangle winding; normals stored in input files
// are ignored. Degenerate (zero-area) triangles keep a zero normal and are
// skipped by surface sampling and ray casting.
class TriangleMesh {
 public:
  using Triangle = std::array<std::uint32_t, 3>;

  TriangleMesh() = default;

  TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    for (const Triangle& t : triangles_) {
      for (std::uint32_t idx : t) {
        if (idx >= vertices_.size()) {
          throw std::invalid_argument("mesh: triangle vertex index out of range");
        }
      }
    }
    derive();
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }

  std::size_t triangle_count() const { return triangles_.size(); }

  const Vec3& corner(std::size_t tri, int c) const {
    return vertices_[triangles_[tri][static_cast<std::size_t>(c)]];
  }

  // Unit normal for non-degenerate triangles, zero vector otherwise.
  const Vec3& normal(std::size_t tri) const { return normals_[tri]; }
  double area(std::size_t tri) const { return areas_[tri]; }
  double total_area() const { return total_area_; }

  std::pair<Vec3, Vec3> bounding_box() const {
    if (vertices_.empty()) return {Vec3::Zero(), Vec3::Zero()};
    Vec3 lo = vertices_.front();
    Vec3 hi = vertices_.front();
    for (const Vec3& v : vertices_) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    return {lo, hi};
  }

 private:
  void derive() {
    normals_.resize(triangles_.size());
    areas_.resize(triangles_.size());
    total_area_ = 0.0;
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      const Vec3& a = corner(t, 0);
      const Vec3 e1 = corner(t, 1) - a;
      const Vec3 e2 = corner(t, 2) - a;
      const Vec3 cross = e1.cross(e2);
      const double len = cross.norm();
      areas_[t] = 0.5 * len;
      normals_[t] = len > 0.0 ? Vec3(cross / len) : Vec3::Zero();
      total_area_ += areas_[t];
    }
  }

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Vec3> normals_;
  std::vector<double> areas_;
  double total_area_ = 0.0;
};

}  // namespace sopp

#endif  // SOPP_MESH_HPP_

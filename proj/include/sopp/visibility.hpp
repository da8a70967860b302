#ifndef SOPP_VISIBILITY_HPP_
#define SOPP_VISIBILITY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sopp/mesh.hpp"

namespace sopp {

// Endpoints of a visibility segment are pulled in by this many meters so a
// sample on the surface is not occluded by its own triangle.
inline constexpr double kSelfOcclusionEpsilon = 1e-6;

namespace detail {

// Watertight segment/triangle test in the style of Woop, Benthin and Wald:
// the ray is sheared into a coordinate frame where it points along +z and the
// edge functions are evaluated consistently, so a segment crossing a shared
// edge or vertex cannot slip between adjacent triangles.
struct ShearFrame {
  Vec3 org;
  int kx, ky, kz;
  double sx, sy, sz;

  ShearFrame(const Vec3& origin, const Vec3& dir) : org(origin) {
    kz = 0;
    if (std::abs(dir.y()) > std::abs(dir[kz])) kz = 1;
    if (std::abs(dir.z()) > std::abs(dir[kz])) kz = 2;
    kx = (kz + 1) % 3;
    ky = (kx + 1) % 3;
    if (dir[kz] < 0.0) std::swap(kx, ky);
    sx = dir[kx] / dir[kz];
    sy = dir[ky] / dir[kz];
    sz = 1.0 / dir[kz];
  }

  // True when the triangle is hit at a parameter t in [tmin, tmax]. Edge and
  // vertex touches count as hits; both facings are accepted.
  bool hits(const Vec3& a, const Vec3& b, const Vec3& c, double tmin,
            double tmax) const {
    const Vec3 A = a - org, B = b - org, C = c - org;
    const double ax = A[kx] - sx * A[kz], ay = A[ky] - sy * A[kz];
    const double bx = B[kx] - sx * B[kz], by = B[ky] - sy * B[kz];
    const double cx = C[kx] - sx * C[kz], cy = C[ky] - sy * C[kz];
    const double u = cx * by - cy * bx;
    const double v = ax * cy - ay * cx;
    const double w = bx * ay - by * ax;
    if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) {
      return false;
    }
    const double det = u + v + w;
    if (det == 0.0) return false;
    const double az = sz * A[kz], bz = sz * B[kz], cz = sz * C[kz];
    const double t_scaled = u * az + v * bz + w * cz;
    if (det < 0.0) {
      return !(t_scaled > det * tmin || t_scaled < det * tmax);
    }
    return !(t_scaled < det * tmin || t_scaled > det * tmax);
  }
};

}  // namespace detail

// Occlusion queries against a triangle mesh, accelerated with a small
// median-split BVH. Holds a pointer to the mesh; the mesh must outlive the
// tester.
class VisibilityTester {
 public:
  explicit VisibilityTester(const TriangleMesh& mesh) : mesh_(&mesh) {
    // degenerate triangles neither occlude nor get sampled
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
      if (mesh.area(t) > 0.0) tris_.push_back(static_cast<std::uint32_t>(t));
    }
    if (!tris_.empty()) {
      bounds_.reserve(tris_.size());
      centroids_.reserve(tris_.size());
      for (std::uint32_t t : tris_) {
        Vec3 lo = mesh.corner(t, 0), hi = lo;
        for (int c = 1; c < 3; ++c) {
          lo = lo.cwiseMin(mesh.corner(t, c));
          hi = hi.cwiseMax(mesh.corner(t, c));
        }
        bounds_.push_back({lo.array() - kBoxPadding, hi.array() + kBoxPadding});
        centroids_.push_back(0.5 * (lo + hi));
      }
      nodes_.reserve(2 * tris_.size());
      build(0, tris_.size());
    }
  }

  // True when the open segment between from and to is unobstructed. Both
  // endpoints are shrunk in by kSelfOcclusionEpsilon meters.
  bool visible(const Vec3& from, const Vec3& to) const {
    const Vec3 dir = to - from;
    const double len = dir.norm();
    if (len == 0.0) {
      throw std::invalid_argument("ray_visible: endpoints coincide");
    }
    if (nodes_.empty()) return true;
    const double tmin = kSelfOcclusionEpsilon / len;
    const double tmax = 1.0 - tmin;
    if (tmin >= tmax) return true;  // endpoints closer than 2 epsilon

    const detail::ShearFrame frame(from, dir);
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (!slab_hit(node, from, dir, tmin, tmax)) continue;
      if (node.count > 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
          const std::uint32_t t = tris_[i];
          if (frame.hits(mesh_->corner(t, 0), mesh_->corner(t, 1),
                         mesh_->corner(t, 2), tmin, tmax)) {
            return false;
          }
        }
      } else {
        stack[top++] = node.right;
        stack[top++] = node.left;
      }
    }
    return true;
  }

 private:
  static constexpr double kBoxPadding = 1e-9;
  static constexpr std::size_t kLeafSize = 4;

  struct Box {
    Vec3 lo, hi;
  };

  struct Node {
    Vec3 lo, hi;
    std::uint32_t left = 0, right = 0;
    std::uint32_t first = 0, count = 0;
  };

  std::uint32_t build(std::size_t begin, std::size_t end) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    Vec3 lo = bounds_[begin].lo, hi = bounds_[begin].hi;
    Vec3 clo = centroids_[begin], chi = centroids_[begin];
    for (std::size_t i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(bounds_[i].lo);
      hi = hi.cwiseMax(bounds_[i].hi);
      clo = clo.cwiseMin(centroids_[i]);
      chi = chi.cwiseMax(centroids_[i]);
    }
    nodes_[index].lo = lo;
    nodes_[index].hi = hi;

    const Vec3 extent = chi - clo;
    int axis = 0;
    if (extent.y() > extent[axis]) axis = 1;
    if (extent.z() > extent[axis]) axis = 2;
    if (end - begin <= kLeafSize || extent[axis] <= 0.0) {
      nodes_[index].first = static_cast<std::uint32_t>(begin);
      nodes_[index].count = static_cast<std::uint32_t>(end - begin);
      return index;
    }

    const std::size_t mid = begin + (end - begin) / 2;
    // reorder tris_/bounds_/centroids_ together through an index permutation
    std::vector<std::size_t> order(end - begin);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = begin + i;
    std::nth_element(order.begin(), order.begin() + static_cast<long>(mid - begin),
                     order.end(), [&](std::size_t a, std::size_t b) {
                       if (centroids_[a][axis] != centroids_[b][axis]) {
                         return centroids_[a][axis] < centroids_[b][axis];
                       }
                       return tris_[a] < tris_[b];
                     });
    apply_permutation(begin, order);

    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  void apply_permutation(std::size_t begin, const std::vector<std::size_t>& order) {
    std::vector<std::uint32_t> t(order.size());
    std::vector<Box> b(order.size());
    std::vector<Vec3> c(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      t[i] = tris_[order[i]];
      b[i] = bounds_[order[i]];
      c[i] = centroids_[order[i]];
    }
    std::copy(t.begin(), t.end(), tris_.begin() + static_cast<long>(begin));
    std::copy(b.begin(), b.end(), bounds_.begin() + static_cast<long>(begin));
    std::copy(c.begin(), c.end(), centroids_.begin() + static_cast<long>(begin));
  }

  // Conservative slab test: a zero direction component yields NaN bounds,
  // which drop out of the max/min updates, so such nodes are visited rather
  // than wrongly culled.
  bool slab_hit(const Node& node, const Vec3& org, const Vec3& dir, double t0,
                double t1) const {
    for (int a = 0; a < 3; ++a) {
      const double inv = 1.0 / dir[a];
      double tn = (node.lo[a] - org[a]) * inv;
      double tf = (node.hi[a] - org[a]) * inv;
      if (inv < 0.0) std::swap(tn, tf);
      if (tn > t0) t0 = tn;
      if (tf < t1) t1 = tf;
      if (t0 > t1) return false;
    }
    return true;
  }

  const TriangleMesh* mesh_;
  std::vector<std::uint32_t> tris_;
  std::vector<Box> bounds_;
  std::vector<Vec3> centroids_;
  std::vector<Node> nodes_;
};

// One-shot convenience wrapper. Builds the acceleration structure each call;
// batch users should keep a VisibilityTester around instead.
inline bool ray_visible(const TriangleMesh& mesh, const Vec3& from, const Vec3& to) {
  return VisibilityTester(mesh).visible(from, to);
}

}  // namespace sopp

#endif  // SOPP_VISIBILITY_HPP_

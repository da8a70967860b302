#ifndef SOPP_HULL_GRID_HPP_
#define SOPP_HULL_GRID_HPP_

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sopp/mesh.hpp"

namespace sopp {

namespace detail {

// feature bits: 1 = a, 2 = b (segment interior = 3)
inline Vec3 closest_on_segment(const Vec3& p, const Vec3& a, const Vec3& b,
                               int* feature) {
  const Vec3 ab = b - a;
  const double denom = ab.squaredNorm();
  if (denom <= 0.0) {
    *feature = 1;
    return a;
  }
  const double t = ab.dot(p - a) / denom;
  if (t <= 0.0) {
    *feature = 1;
    return a;
  }
  if (t >= 1.0) {
    *feature = 2;
    return b;
  }
  *feature = 3;
  return a + t * ab;
}

// Voronoi-region closest point on a triangle (Ericson, Real-Time Collision
// Detection 5.1.5). feature bits: 1 = a, 2 = b, 4 = c.
inline Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                const Vec3& c, int* feature) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    *feature = 1;
    return a;
  }
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    *feature = 2;
    return b;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double denom = d1 - d3;
    if (denom > 0.0) {
      *feature = 3;
      return a + (d1 / denom) * ab;
    }
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    *feature = 4;
    return c;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double denom = d2 - d6;
    if (denom > 0.0) {
      *feature = 5;
      return a + (d2 / denom) * ac;
    }
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double denom = (d4 - d3) + (d5 - d6);
    if (denom > 0.0) {
      *feature = 6;
      return b + ((d4 - d3) / denom) * (c - b);
    }
  }
  const double denom = va + vb + vc;
  if (denom > 0.0) {
    const double v = vb / denom, w = vc / denom;
    *feature = 7;
    return a + ab * v + ac * w;
  }
  // collinear triangle: best of the three edges
  int fab = 0, fac = 0, fbc = 0;
  const Vec3 pab = closest_on_segment(p, a, b, &fab);
  const Vec3 pac = closest_on_segment(p, a, c, &fac);
  const Vec3 pbc = closest_on_segment(p, b, c, &fbc);
  const double dab = (p - pab).squaredNorm();
  const double dac = (p - pac).squaredNorm();
  const double dbc = (p - pbc).squaredNorm();
  if (dab <= dac && dab <= dbc) {
    *feature = fab;  // bits of a/b line up
    return pab;
  }
  if (dac <= dbc) {
    *feature = (fac & 1) | ((fac & 2) ? 4 : 0);
    return pac;
  }
  *feature = ((fbc & 1) ? 2 : 0) | ((fbc & 2) ? 4 : 0);
  return pbc;
}

// feature bits: 1 = a, 2 = b, 4 = c, 8 = d; 15 means p is interior
inline Vec3 closest_on_tetrahedron(const Vec3& p, const Vec3& a, const Vec3& b,
                                   const Vec3& c, const Vec3& d, int* feature) {
  const double vol = std::abs((b - a).cross(c - a).dot(d - a));
  const std::array<Vec3, 4> verts{a, b, c, d};
  // face vertex indices plus the opposing vertex
  const int faces[4][4] = {
      {0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}, {1, 3, 2, 0}};

  bool inside = vol > 0.0;
  Vec3 best = a;
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_feature = 1;
  for (const auto& f : faces) {
    const Vec3 &x = verts[f[0]], &y = verts[f[1]], &z = verts[f[2]];
    const Vec3 n = (y - x).cross(z - x);
    const double side_p = (p - x).dot(n);
    const double side_o = (verts[f[3]] - x).dot(n);
    const bool outside = side_o != 0.0 && side_p * side_o < 0.0;
    if (outside) inside = false;
    if (outside || vol <= 0.0) {
      int tf = 0;
      const Vec3 q = closest_on_triangle(p, x, y, z, &tf);
      const double d2 = (p - q).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = q;
        best_feature = ((tf & 1) ? 1 << f[0] : 0) | ((tf & 2) ? 1 << f[1] : 0) |
                       ((tf & 4) ? 1 << f[2] : 0);
      }
    }
  }
  if (inside) {
    *feature = 15;
    return p;
  }
  *feature = best_feature;
  return best;
}

}  // namespace detail

// Euclidean distance from q to the convex hull of `points` (zero inside).
// GJK over the vertex cloud: the hull is never constructed explicitly, each
// iteration refines a simplex of hull vertices supporting the current closest
// point. Exact to floating-point convergence for well-conditioned inputs.
inline double convex_hull_distance(const std::vector<Vec3>& points, const Vec3& q) {
  if (points.empty()) {
    throw std::invalid_argument("convex_hull_distance: empty point set");
  }
  double scale = q.cwiseAbs().maxCoeff();
  for (const Vec3& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol_len = 1e-12 * (1.0 + scale);

  std::array<int, 4> simplex{0, 0, 0, 0};
  int simplex_size = 1;
  Vec3 closest = points[0];

  for (int iter = 0; iter < 100; ++iter) {
    const Vec3 d = q - closest;
    const double dist = d.norm();
    if (dist <= tol_len) return 0.0;

    // support vertex in direction d; ties resolved toward the lowest index
    int s = 0;
    double best_dot = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double dot = d.dot(points[i]);
      if (dot > best_dot) {
        best_dot = dot;
        s = static_cast<int>(i);
      }
    }
    // no vertex improves on the supporting feature: converged
    if (best_dot - d.dot(closest) <= tol_len * dist) break;
    bool duplicate = false;
    for (int i = 0; i < simplex_size; ++i) duplicate |= simplex[i] == s;
    if (duplicate) break;

    simplex[simplex_size++] = s;
    int feature = 0;
    switch (simplex_size) {
      case 2:
        closest = detail::closest_on_segment(q, points[simplex[0]],
                                             points[simplex[1]], &feature);
        break;
      case 3:
        closest = detail::closest_on_triangle(q, points[simplex[0]],
                                              points[simplex[1]],
                                              points[simplex[2]], &feature);
        break;
      default:
        closest = detail::closest_on_tetrahedron(
            q, points[simplex[0]], points[simplex[1]], points[simplex[2]],
            points[simplex[3]], &feature);
        break;
    }
    if (simplex_size == 4 && feature == 15) return 0.0;

    // keep only the vertices of the supporting feature
    std::array<int, 4> reduced{0, 0, 0, 0};
    int n = 0;
    for (int i = 0; i < simplex_size; ++i) {
      if (feature & (1 << i)) reduced[n++] = simplex[i];
    }
    simplex = reduced;
    simplex_size = std::max(n, 1);
  }
  return (q - closest).norm();
}

// Euclidean distance from p to an axis-aligned box.
inline double box_distance(const Vec3& lo, const Vec3& hi, const Vec3& p) {
  const Vec3 clamped = p.cwiseMax(lo).cwiseMin(hi);
  return (p - clamped).norm();
}

// Candidate sensor positions: all points of a regular grid that lie within
// `dilation` of the convex hull of the mesh vertices. The grid is anchored at
// the minimum corner of the vertex bounding box and spaced by `resolution`.
// Inclusion allows 1e-9 m of slack so boundary points are kept.
//
// Meshes with fewer than four non-coplanar vertices have a degenerate hull;
// those fall back to the Euclidean distance to the vertex bounding box, which
// for axis-aligned planar plates coincides with the true hull distance.
inline std::vector<Vec3> inflated_hull_grid(const TriangleMesh& mesh,
                                            double dilation, double resolution) {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("inflated_hull_grid: resolution must be > 0");
  }
  if (dilation < 0.0) {
    throw std::invalid_argument("inflated_hull_grid: dilation must be >= 0");
  }
  const auto& pts = mesh.vertices();
  if (pts.empty()) {
    throw std::invalid_argument("inflated_hull_grid: mesh has no vertices");
  }

  const auto [lo, hi] = mesh.bounding_box();
  const Vec3 anchor = lo;

  double scale = 0.0;
  for (const Vec3& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * (1.0 + scale);

  // four affinely independent vertices are needed for a solid hull
  bool full_dim = false;
  {
    const Vec3& v0 = pts[0];
    int i1 = -1, i2 = -1;
    for (std::size_t i = 1; i < pts.size() && i1 < 0; ++i) {
      if ((pts[i] - v0).norm() > tol) i1 = static_cast<int>(i);
    }
    if (i1 >= 0) {
      for (std::size_t i = 1; i < pts.size() && i2 < 0; ++i) {
        if ((pts[i] - v0).cross(pts[i1] - v0).norm() > tol * (1.0 + scale)) {
          i2 = static_cast<int>(i);
        }
      }
    }
    if (i2 >= 0) {
      const Vec3 n = (pts[i1] - v0).cross(pts[i2] - v0);
      for (std::size_t i = 1; i < pts.size(); ++i) {
        if (std::abs(n.dot(pts[i] - v0)) > tol * (1.0 + scale) * (1.0 + scale)) {
          full_dim = true;
          break;
        }
      }
    }
  }

  std::array<long, 3> ilo, ihi;
  for (int a = 0; a < 3; ++a) {
    ilo[a] = static_cast<long>(
        std::ceil((lo[a] - dilation - anchor[a]) / resolution - 1e-9));
    ihi[a] = static_cast<long>(
        std::floor((hi[a] + dilation - anchor[a]) / resolution + 1e-9));
  }

  const double limit = dilation + 1e-9;
  std::vector<Vec3> grid;
  for (long ix = ilo[0]; ix <= ihi[0]; ++ix) {
    for (long iy = ilo[1]; iy <= ihi[1]; ++iy) {
      for (long iz = ilo[2]; iz <= ihi[2]; ++iz) {
        const Vec3 p = anchor + resolution * Vec3(static_cast<double>(ix),
                                                  static_cast<double>(iy),
                                                  static_cast<double>(iz));
        const double dist = full_dim ? convex_hull_distance(pts, p)
                                     : box_distance(lo, hi, p);
        if (dist <= limit) grid.push_back(p);
      }
    }
  }
  return grid;
}

}  // namespace sopp

#endif  // SOPP_HULL_GRID_HPP_

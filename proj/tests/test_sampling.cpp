#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sopp/orientations.hpp"
#include "sopp/surface_sampling.hpp"
#include "support/oracles.hpp"

using sopp::ModelPoint;
using sopp::Quat;
using sopp::TriangleMesh;
using sopp::Vec3;

TEST_CASE("surface sampling is deterministic in the seed") {
  const TriangleMesh mesh = sopp_tests::make_box({0, 0, 0}, {1, 1, 1});
  const auto a = sopp::sample_surface(mesh, 200, 7);
  const auto b = sopp::sample_surface(mesh, 200, 7);
  REQUIRE(a.size() == 200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].position == b[i].position);
    REQUIRE(a[i].source_triangle == b[i].source_triangle);
  }
  const auto c = sopp::sample_surface(mesh, 200, 8);
  int moved = 0;
  for (std::size_t i = 0; i < a.size(); ++i) moved += a[i].position != c[i].position;
  REQUIRE(moved > 150);
}

TEST_CASE("samples lie on their source triangle with its normal") {
  const TriangleMesh mesh = sopp_tests::make_tetrahedron();
  for (const ModelPoint& p : sopp::sample_surface(mesh, 500, 11)) {
    REQUIRE(p.source_triangle < mesh.triangle_count());
    const Vec3& a = mesh.corner(p.source_triangle, 0);
    const Vec3 e1 = mesh.corner(p.source_triangle, 1) - a;
    const Vec3 e2 = mesh.corner(p.source_triangle, 2) - a;
    // solve p = a + u e1 + v e2 and check barycentric bounds
    const Vec3 d = p.position - a;
    const double d11 = e1.dot(e1), d12 = e1.dot(e2), d22 = e2.dot(e2);
    const double det = d11 * d22 - d12 * d12;
    const double u = (d22 * d.dot(e1) - d12 * d.dot(e2)) / det;
    const double v = (d11 * d.dot(e2) - d12 * d.dot(e1)) / det;
    REQUIRE(u >= -1e-12);
    REQUIRE(v >= -1e-12);
    REQUIRE(u + v <= 1.0 + 1e-12);
    const double off_plane = std::abs((d - u * e1 - v * e2).norm());
    REQUIRE(off_plane < 1e-12);
    REQUIRE(p.normal == mesh.normal(p.source_triangle));
  }
}

TEST_CASE("triangle choice is proportional to area") {
  // two triangles with a 9:1 area split
  std::vector<Vec3> v = {{0, 0, 0}, {9, 0, 0}, {0, 2, 0},
                         {10, 0, 0}, {11, 0, 0}, {10, 2, 0}};
  std::vector<TriangleMesh::Triangle> t = {{0, 1, 2}, {3, 4, 5}};
  const TriangleMesh mesh(std::move(v), std::move(t));
  const auto samples = sopp::sample_surface(mesh, 10000, 3);
  std::size_t big = 0;
  for (const ModelPoint& p : samples) big += p.source_triangle == 0;
  REQUIRE(big >= 8700);
  REQUIRE(big <= 9300);
}

TEST_CASE("samples are uniform across a flat plate") {
  const TriangleMesh plate = sopp_tests::make_quad_plate(2.0, 2.0);
  std::vector<double> observed(4, 0.0);
  const int n = 40000;
  for (const ModelPoint& p : sopp::sample_surface(plate, n, 5)) {
    const int qx = p.position.x() >= 0.0;
    const int qy = p.position.y() >= 0.0;
    observed[static_cast<std::size_t>(2 * qy + qx)] += 1.0;
  }
  std::vector<double> expected(4, n / 4.0);
  REQUIRE(sopp_tests::chi_square_statistic(observed, expected) <
          sopp_tests::kChi2Critical3);
}

TEST_CASE("surface sampling rejects bad input") {
  const TriangleMesh mesh = sopp_tests::make_quad_plate(1.0, 1.0);
  REQUIRE_THROWS_AS(sopp::sample_surface(mesh, 0, 1), std::invalid_argument);
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  std::vector<TriangleMesh::Triangle> t = {{0, 1, 2}};
  const TriangleMesh degenerate(std::move(v), std::move(t));
  REQUIRE_THROWS_AS(sopp::sample_surface(degenerate, 10, 1), std::runtime_error);
}

TEST_CASE("orientation samples are unit quaternions and deterministic") {
  const auto a = sopp::sample_orientations(64, 2);
  const auto b = sopp::sample_orientations(64, 2);
  REQUIRE(a.size() == 64);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE_THAT(a[i].norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE(a[i].coeffs() == b[i].coeffs());
  }
  REQUIRE_THROWS_AS(sopp::sample_orientations(0, 2), std::invalid_argument);
}

TEST_CASE("rotated directions cover the sphere uniformly") {
  const int n = 40000;
  const auto qs = sopp::sample_orientations(n, 9);
  std::vector<double> observed(8, 0.0);
  for (const Quat& q : qs) {
    const Vec3 d = q * Vec3::UnitZ();
    const int i = (d.x() >= 0) + 2 * (d.y() >= 0) + 4 * (d.z() >= 0);
    observed[static_cast<std::size_t>(i)] += 1.0;
  }
  std::vector<double> expected(8, n / 8.0);
  REQUIRE(sopp_tests::chi_square_statistic(observed, expected) <
          sopp_tests::kChi2Critical7);
}

TEST_CASE("orientation distance measures geodesic rotation angle") {
  const Quat id = Quat::Identity();
  REQUIRE(sopp::orientation_distance(id, id) == 0.0);
  const Quat neg(-1.0, 0.0, 0.0, 0.0);  // same rotation, opposite sign
  REQUIRE_THAT(sopp::orientation_distance(id, neg),
               Catch::Matchers::WithinAbs(0.0, 1e-12));
  const double half = M_PI / 4.0;  // 90 degree turn about z
  const Quat quarter(std::cos(half), 0.0, 0.0, std::sin(half));
  REQUIRE_THAT(sopp::orientation_distance(id, quarter),
               Catch::Matchers::WithinAbs(M_PI / 2.0, 1e-12));
  REQUIRE(sopp::orientation_distance(quarter, id) ==
          sopp::orientation_distance(id, quarter));
}

#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "sopp/mesh_io.hpp"
#include "support/oracles.hpp"

using sopp::TriangleMesh;
using sopp::Vec3;

TEST_CASE("derived normals areas and bounding box") {
  const TriangleMesh plate = sopp_tests::make_quad_plate(2.0, 2.0);
  REQUIRE(plate.triangle_count() == 2);
  for (std::size_t t = 0; t < 2; ++t) {
    REQUIRE(plate.normal(t).isApprox(Vec3(0, 0, 1)));
    REQUIRE_THAT(plate.area(t), Catch::Matchers::WithinRel(2.0, 1e-12));
  }
  REQUIRE_THAT(plate.total_area(), Catch::Matchers::WithinRel(4.0, 1e-12));
  const auto [lo, hi] = plate.bounding_box();
  REQUIRE(lo.isApprox(Vec3(-1, -1, 0)));
  REQUIRE(hi.isApprox(Vec3(1, 1, 0)));
}

TEST_CASE("degenerate triangle gets zero normal and area") {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  std::vector<TriangleMesh::Triangle> t = {{0, 1, 2}};
  const TriangleMesh mesh(std::move(v), std::move(t));
  REQUIRE(mesh.normal(0) == Vec3::Zero());
  REQUIRE(mesh.area(0) == 0.0);
  REQUIRE(mesh.total_area() == 0.0);
}

TEST_CASE("triangle index out of range is rejected") {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}};
  std::vector<TriangleMesh::Triangle> t = {{0, 1, 2}};
  REQUIRE_THROWS_AS(TriangleMesh(std::move(v), std::move(t)),
                    std::invalid_argument);
}

TEST_CASE("obj save and load round-trips exactly") {
  const TriangleMesh box = sopp_tests::make_box({-0.25, 0.5, -1}, {1.75, 2.5, 3});
  sopp_tests::TempDir dir("obj");
  const auto path = dir.path() / "box.obj";
  sopp::save_obj(box, path);
  const TriangleMesh back = sopp::load_mesh(path);
  REQUIRE(back.vertices().size() == box.vertices().size());
  REQUIRE(back.triangles() == box.triangles());
  for (std::size_t i = 0; i < box.vertices().size(); ++i) {
    REQUIRE(back.vertices()[i] == box.vertices()[i]);  // precision 17 is exact
  }
}

TEST_CASE("obj parser handles slash refs comments and negative indices") {
  std::istringstream in(
      "# comment\n"
      "v 0 0 0\n"
      "v 1 0 0\n"
      "v 0 1 0\n"
      "vn 0 0 1\n"
      "vt 0.5 0.5\n"
      "f 1/1 2/1/1 3//1\n"
      "f -3 -2 -1\n");
  const TriangleMesh mesh = sopp::load_obj(in, "inline.obj");
  REQUIRE(mesh.vertices().size() == 3);
  REQUIRE(mesh.triangle_count() == 2);
  REQUIRE(mesh.triangles()[0] == TriangleMesh::Triangle{0, 1, 2});
  REQUIRE(mesh.triangles()[1] == TriangleMesh::Triangle{0, 1, 2});
}

TEST_CASE("obj parser reports the offending line") {
  std::istringstream quad("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  REQUIRE_THROWS_WITH(sopp::load_obj(quad, "bad.obj"),
                      Catch::Matchers::ContainsSubstring("bad.obj:5"));
  std::istringstream range("v 0 0 0\nf 1 2 3\n");
  REQUIRE_THROWS_WITH(sopp::load_obj(range, "bad.obj"),
                      Catch::Matchers::ContainsSubstring("out of range"));
  std::istringstream vertex("v 0 0\n");
  REQUIRE_THROWS_WITH(sopp::load_obj(vertex, "bad.obj"),
                      Catch::Matchers::ContainsSubstring("malformed vertex"));
}

TEST_CASE("binary stl round-trips with vertex dedup") {
  const TriangleMesh box = sopp_tests::make_box({0, 0, 0}, {1, 2, 3});
  sopp_tests::TempDir dir("stl");
  const auto path = dir.path() / "box.stl";
  sopp::save_stl_binary(box, path);
  const TriangleMesh back = sopp::load_mesh(path);
  REQUIRE(back.triangle_count() == box.triangle_count());
  REQUIRE(back.vertices().size() == 8);  // 36 corners fold back to 8
  for (std::size_t t = 0; t < box.triangle_count(); ++t) {
    for (int c = 0; c < 3; ++c) {
      REQUIRE(back.corner(t, c).isApprox(box.corner(t, c), 1e-6));
    }
  }
  REQUIRE_THAT(back.total_area(), Catch::Matchers::WithinRel(22.0, 1e-5));
}

TEST_CASE("ascii stl parses facets") {
  sopp_tests::TempDir dir("astl");
  const auto path = dir.path() / "tri.stl";
  {
    std::ofstream out(path);
    out << "solid tri\n"
           " facet normal 0 0 1\n"
           "  outer loop\n"
           "   vertex 0 0 0\n"
           "   vertex 1 0 0\n"
           "   vertex 0 1 0\n"
           "  endloop\n"
           " endfacet\n"
           "endsolid tri\n";
  }
  const TriangleMesh mesh = sopp::load_mesh(path);
  REQUIRE(mesh.triangle_count() == 1);
  REQUIRE(mesh.vertices().size() == 3);
  REQUIRE_THAT(mesh.area(0), Catch::Matchers::WithinRel(0.5, 1e-12));
}

TEST_CASE("extension dispatch is case-insensitive and rejects unknown") {
  const TriangleMesh tri = sopp_tests::make_quad_plate(1.0, 1.0);
  sopp_tests::TempDir dir("ext");
  const auto upper = dir.path() / "plate.OBJ";
  sopp::save_obj(tri, upper);
  REQUIRE(sopp::load_mesh(upper).triangle_count() == 2);
  REQUIRE_THROWS_WITH(sopp::load_mesh(dir.path() / "plate.ply"),
                      Catch::Matchers::ContainsSubstring("unsupported mesh format"));
  REQUIRE_THROWS_WITH(sopp::load_mesh(dir.path() / "missing.obj"),
                      Catch::Matchers::ContainsSubstring("cannot open"));
}

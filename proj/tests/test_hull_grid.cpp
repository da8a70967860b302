#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sopp/hull_grid.hpp"
#include "support/oracles.hpp"

using sopp::TriangleMesh;
using sopp::Vec3;

namespace {

struct HullCase {
  std::vector<Vec3> points;
  Vec3 query;
  double distance;
};

// reference distances from an independent projected-gradient QP solve of
// min |sum_i w_i p_i - q| over the probability simplex
const std::vector<HullCase> kHullCases = {
    {{{-0.64213037264912765, 0.27982633143030911, -0.065463197713029775},
      {-0.25899894578390392, -0.29016533138069756, 0.58103649170653004},
      {0.81028767335434781, -0.6452936163539027, 0.3055696053702639},
      {-0.40339446528886147, 0.93392440032478108, 0.83970032107455639},
      {0.27174160828930272, 0.50546419415817323, 0.030307392644703501},
      {0.65179051675113997, -0.10323890919979362, -0.32237509337247627},
      {-0.44420156899968188, -0.54733388631319313, 0.051633686690496727},
      {-0.13817587863113712, 0.32636124094519081, -0.97431903526638686}},
     {4, -3, 2.5},
     4.5314933120124676},
    {{{-0.6568942953838377, -0.90445759660282588, -1.4138072003853379},
      {-0.21540238698184155, -0.6940605321480664, -1.1000254887645506},
      {-1.3717516362913413, 0.62387217157653829, 0.39238694656429818},
      {-0.17987096994506313, -0.96469826399812364, 0.84045937293894513},
      {-0.30986787649236325, -0.70171178114014388, 0.70134879701266595},
      {-1.0419745882944129, 0.087984610401349972, -1.0585390182128898},
      {-1.2153408610645999, 0.10252266850256619, -1.3163240632779269},
      {-0.52066903104535767, -0.2599146409383315, -1.4332809057366247},
      {0.19372197507533384, -0.35455080612610912, -0.13549022112218712},
      {-0.88356704960951027, -0.73942022023809839, -0.5155109662488313}},
     {2.2000000000000002, 2, -1.5},
     3.3598253956172544},
    {{{-0.30029087593830162, 0.17563922284962308, 0.077177504496199201},
      {-0.837293570075337, -0.49819764639318098, 0.29403106077550423},
      {0.19384221144335578, -0.17345533618872999, -4.4977588806061064e-05},
      {-4.0655406650538195, 0.40470407255335283, 0.48973616758450345},
      {-4.4126478248441705, -0.14176878140861859, 0.23006457781908352},
      {-1.8576186878211731, 0.06704975836444893, -0.08342903768497012}},
     {0, 4, 1},
     3.9454286832432284},
    {{{0.54842431526174984, 0.91692880192806769, 0.015535817052667067},
      {0.24187093040009899, -0.67945137466386041, 0.01788248333246651},
      {-0.95273514265644788, -0.40458108715827712, -0.0087354602759761677},
      {0.34365196344540938, -0.025273867854977095, -0.016284458049702112},
      {-0.9742842245101393, 0.20863149354727573, -0.00034066670636295537},
      {0.20276424268080229, 0.12804772773106898, 0.015618364331987201},
      {0.83679371574119354, -0.62348567779526998, 0.017684834778821368}},
     {0.5, -0.25, 3},
     2.9827803846157988},
};

}  // namespace

TEST_CASE("hull distance matches an independent QP solver") {
  for (const HullCase& c : kHullCases) {
    REQUIRE_THAT(sopp::convex_hull_distance(c.points, c.query),
                 Catch::Matchers::WithinAbs(c.distance, 1e-9));
  }
}

TEST_CASE("hull of box corners behaves like the box") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    const Vec3 lo = a.cwiseMin(b), hi = a.cwiseMax(b);
    std::vector<Vec3> corners;
    for (int m = 0; m < 8; ++m) {
      corners.emplace_back(m & 1 ? hi.x() : lo.x(), m & 2 ? hi.y() : lo.y(),
                           m & 4 ? hi.z() : lo.z());
    }
    const Vec3 q(2.0 * u(rng), 2.0 * u(rng), 2.0 * u(rng));
    const double expected = sopp_tests::box_distance_oracle(q, lo, hi);
    REQUIRE_THAT(sopp::convex_hull_distance(corners, q),
                 Catch::Matchers::WithinAbs(expected, 1e-9));
    REQUIRE_THAT(sopp::box_distance(lo, hi, q),
                 Catch::Matchers::WithinAbs(expected, 1e-12));
  }
}

TEST_CASE("hull distance in every voronoi region of a tetrahedron") {
  const std::vector<Vec3> tetra = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  REQUIRE_THAT(sopp::convex_hull_distance(tetra, {-1, -1, -1}),
               Catch::Matchers::WithinAbs(std::sqrt(3.0), 1e-10));  // vertex
  REQUIRE_THAT(sopp::convex_hull_distance(tetra, {2, 0, 0}),
               Catch::Matchers::WithinAbs(1.0, 1e-10));  // beyond a vertex
  REQUIRE_THAT(sopp::convex_hull_distance(tetra, {1, 1, 0}),
               Catch::Matchers::WithinAbs(std::sqrt(0.5), 1e-10));  // edge
  REQUIRE_THAT(sopp::convex_hull_distance(tetra, {0.25, 0.25, -1}),
               Catch::Matchers::WithinAbs(1.0, 1e-10));  // face
  REQUIRE_THAT(sopp::convex_hull_distance(tetra, {1, 1, 1}),
               Catch::Matchers::WithinAbs(2.0 / std::sqrt(3.0), 1e-10));
  REQUIRE_THAT(sopp::convex_hull_distance(tetra, {0.1, 0.1, 0.1}),
               Catch::Matchers::WithinAbs(0.0, 1e-10));  // interior
  REQUIRE_THAT(sopp::convex_hull_distance(tetra, {0.5, 0.5, 0.0}),
               Catch::Matchers::WithinAbs(0.0, 1e-10));  // on the boundary
}

TEST_CASE("closest point helpers dominate dense triangle sampling") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec3 a(u(rng), u(rng), u(rng));
    const Vec3 b(u(rng), u(rng), u(rng));
    const Vec3 c(u(rng), u(rng), u(rng));
    const Vec3 p(u(rng), u(rng), u(rng));
    int feature = 0;
    const Vec3 best = sopp::detail::closest_on_triangle(p, a, b, c, &feature);
    const double d = (p - best).norm();
    for (int i = 0; i <= 40; ++i) {
      for (int j = 0; i + j <= 40; ++j) {
        const double s = i / 40.0, t = j / 40.0;
        const Vec3 x = a + s * (b - a) + t * (c - a);
        REQUIRE(d <= (p - x).norm() + 1e-9);
      }
    }
  }
}

TEST_CASE("grid points are anchored spaced and within the dilated hull") {
  const TriangleMesh box = sopp_tests::make_box({0, 0, 0}, {0.4, 0.3, 0.2});
  const double res = 0.1, dil = 0.25;
  const auto grid = sopp::inflated_hull_grid(box, dil, res);
  REQUIRE_FALSE(grid.empty());
  const Vec3 anchor(0, 0, 0);
  for (const Vec3& p : grid) {
    for (int axis = 0; axis < 3; ++axis) {
      const double steps = (p[axis] - anchor[axis]) / res;
      REQUIRE_THAT(steps, Catch::Matchers::WithinAbs(std::round(steps), 1e-9));
    }
    REQUIRE(sopp::convex_hull_distance(box.vertices(), p) <= dil + 1e-9);
  }
  // no lattice point within the dilated hull is missing
  std::size_t expected = 0;
  for (long ix = -3; ix <= 7; ++ix) {
    for (long iy = -3; iy <= 6; ++iy) {
      for (long iz = -3; iz <= 5; ++iz) {
        const Vec3 p = anchor + res * Vec3(double(ix), double(iy), double(iz));
        expected += sopp::convex_hull_distance(box.vertices(), p) <= dil + 1e-9;
      }
    }
  }
  REQUIRE(grid.size() == expected);
}

TEST_CASE("larger dilation only adds grid points") {
  const TriangleMesh tetra = sopp_tests::make_tetrahedron();
  const auto small = sopp::inflated_hull_grid(tetra, 0.2, 0.15);
  const auto large = sopp::inflated_hull_grid(tetra, 0.5, 0.15);
  REQUIRE(small.size() < large.size());
  for (const Vec3& p : small) {
    REQUIRE(std::count_if(large.begin(), large.end(),
                          [&](const Vec3& q) { return q == p; }) == 1);
  }
}

TEST_CASE("planar plates fall back to the box metric") {
  const TriangleMesh plate = sopp_tests::make_quad_plate(1.0, 1.0, 0.25);
  const double res = 0.2, dil = 0.3;
  const auto grid = sopp::inflated_hull_grid(plate, dil, res);
  REQUIRE_FALSE(grid.empty());
  const auto [lo, hi] = plate.bounding_box();
  for (const Vec3& p : grid) {
    REQUIRE(sopp_tests::box_distance_oracle(p, lo, hi) <= dil + 1e-9);
  }
  // the plate is axis aligned, so the box metric is the exact hull distance:
  // z spans one layer above and below within 0.3 of z = 0.25
  double zmin = 1e9, zmax = -1e9;
  for (const Vec3& p : grid) {
    zmin = std::min(zmin, p.z());
    zmax = std::max(zmax, p.z());
  }
  REQUIRE_THAT(zmin, Catch::Matchers::WithinAbs(0.05, 1e-12));
  REQUIRE_THAT(zmax, Catch::Matchers::WithinAbs(0.45, 1e-12));
}

TEST_CASE("grid construction rejects bad parameters") {
  const TriangleMesh tetra = sopp_tests::make_tetrahedron();
  REQUIRE_THROWS_AS(sopp::inflated_hull_grid(tetra, 0.1, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(sopp::inflated_hull_grid(tetra, -0.1, 0.1), std::invalid_argument);
  const TriangleMesh empty;
  REQUIRE_THROWS_AS(sopp::inflated_hull_grid(empty, 0.1, 0.1), std::invalid_argument);
}

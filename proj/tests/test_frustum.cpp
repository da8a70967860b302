#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sopp/frustum.hpp"

using sopp::Frustum;
using sopp::Quat;
using sopp::Vec3;

namespace {

Vec3 cone_direction(double angle_rad) {
  return {std::sin(angle_rad), 0.0, std::cos(angle_rad)};
}

}  // namespace

TEST_CASE("frustum angle validation") {
  REQUIRE_NOTHROW(Frustum{45.0}.validate());
  REQUIRE_THROWS_AS(Frustum{0.0}.validate(), std::invalid_argument);
  REQUIRE_THROWS_AS(Frustum{180.0}.validate(), std::invalid_argument);
  REQUIRE_THROWS_AS(Frustum{-5.0}.validate(), std::invalid_argument);
}

TEST_CASE("the optical axis follows the rotated z axis") {
  REQUIRE(sopp::optical_axis(Quat::Identity()).isApprox(Vec3::UnitZ()));
  const double h = M_PI / 4.0;  // 90 degrees about y maps z to x
  const Quat about_y(std::cos(h), 0.0, std::sin(h), 0.0);
  REQUIRE(sopp::optical_axis(about_y).isApprox(Vec3::UnitX(), 1e-12));
  const Quat about_x(std::cos(h), std::sin(h), 0.0, 0.0);
  REQUIRE(sopp::optical_axis(about_x).isApprox(-Vec3::UnitY(), 1e-12));
}

TEST_CASE("cone membership straddles the half angle") {
  const Frustum f{90.0};  // half angle 45 degrees
  const Vec3 pos = Vec3::Zero();
  const Quat id = Quat::Identity();
  const double half = sopp::deg_to_rad(45.0);
  REQUIRE(sopp::in_frustum(pos, id, {0, 0, 1}, f));
  REQUIRE(sopp::in_frustum(pos, id, cone_direction(half - 1e-9), f));
  REQUIRE_FALSE(sopp::in_frustum(pos, id, cone_direction(half + 1e-9), f));
  REQUIRE_FALSE(sopp::in_frustum(pos, id, {1, 0, 0}, f));
  REQUIRE_FALSE(sopp::in_frustum(pos, id, {0, 0, -1}, f));
  REQUIRE_FALSE(sopp::in_frustum(pos, id, {0.5, 0.5, -0.001}, f));
}

TEST_CASE("membership is invariant to distance along the ray") {
  const Frustum f{60.0};
  const Quat id = Quat::Identity();
  const Vec3 inside = cone_direction(sopp::deg_to_rad(29.0));
  const Vec3 outside = cone_direction(sopp::deg_to_rad(31.0));
  for (double s : {1e-6, 0.5, 1.0, 42.0, 1e6}) {
    REQUIRE(sopp::in_frustum(Vec3::Zero(), id, s * inside, f));
    REQUIRE_FALSE(sopp::in_frustum(Vec3::Zero(), id, s * outside, f));
  }
}

TEST_CASE("the sensor position itself is outside") {
  const Frustum f{90.0};
  REQUIRE_FALSE(sopp::in_frustum({1, 2, 3}, Quat::Identity(), {1, 2, 3}, f));
}

TEST_CASE("rotated and translated sensor") {
  const Frustum f{90.0};
  const Vec3 pos(5.0, -2.0, 1.0);
  const double h = M_PI / 4.0;
  const Quat about_y(std::cos(h), 0.0, std::sin(h), 0.0);  // axis = +x
  REQUIRE(sopp::in_frustum(pos, about_y, pos + Vec3(2.0, 0.1, -0.1), f));
  REQUIRE_FALSE(sopp::in_frustum(pos, about_y, pos + Vec3(-2.0, 0.0, 0.0), f));
  REQUIRE_FALSE(sopp::in_frustum(pos, about_y, pos + Vec3(0.0, 2.0, 0.0), f));
}

TEST_CASE("wide cones accept almost sideways directions") {
  const Frustum f{179.0};
  const Quat id = Quat::Identity();
  REQUIRE(sopp::in_frustum(Vec3::Zero(), id, cone_direction(sopp::deg_to_rad(89.0)), f));
  REQUIRE_FALSE(
      sopp::in_frustum(Vec3::Zero(), id, cone_direction(sopp::deg_to_rad(91.0)), f));
}

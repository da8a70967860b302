#ifndef SOPP_FRUSTUM_HPP_
#define SOPP_FRUSTUM_HPP_

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sopp/common.hpp"

namespace sopp {

// Symmetric viewing cone of the sensor. The full opening angle is
// perspective_angle_deg; a point is inside when the angle between the optical
// axis and the point direction is at most half of it.
struct Frustum {
  double perspective_angle_deg = 45.0;

  void validate() const {
    if (!(perspective_angle_deg > 0.0) || !(perspective_angle_deg < 180.0)) {
      throw std::invalid_argument(
          "frustum: perspective angle must lie in (0, 180) degrees");
    }
  }
};

inline double deg_to_rad(double deg) {
  return deg * (std::numbers::pi / 180.0);
}

// The sensor looks along the rotated +z axis.
inline Vec3 optical_axis(const Quat& orientation) {
  return orientation * Vec3::UnitZ();
}

// True when `point` lies inside the viewing cone of a sensor at `position`
// with the given orientation. The boundary counts as inside; a point at the
// sensor position does not (its direction is undefined).
inline bool in_frustum(const Vec3& position, const Quat& orientation,
                       const Vec3& point, const Frustum& frustum) {
  frustum.validate();
  const Vec3 axis = optical_axis(orientation);
  const Vec3 d = point - position;
  const double forward = axis.dot(d);
  if (forward <= 0.0) return false;
  const double cos_half = std::cos(deg_to_rad(0.5 * frustum.perspective_angle_deg));
  // angle(axis, d) <= half_angle  <=>  forward >= |d| * cos(half_angle)
  return forward >= d.norm() * cos_half;
}

}  // namespace sopp

#endif  // SOPP_FRUSTUM_HPP_

#ifndef SOPP_ORIENTATIONS_HPP_
#define SOPP_ORIENTATIONS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sopp/common.hpp"

namespace sopp {

// Uniform random unit quaternions (Shoemake's subgroup construction), which
// sample the Haar measure on SO(3). Three uniform variates are drawn per
// quaternion in a fixed order, so a seed pins the whole sequence.
inline std::vector<Quat> sample_orientations(std::size_t count,
                                             std::uint64_t seed) {
  if (count == 0) {
    throw std::invalid_argument("sample_orientations: count must be >= 1");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Rng rng(seed);
  std::vector<Quat> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double u3 = rng.uniform();
    const double r1 = std::sqrt(1.0 - u1);
    const double r2 = std::sqrt(u1);
    Quat q(r2 * std::cos(two_pi * u3),   // w
           r1 * std::sin(two_pi * u2),   // x
           r1 * std::cos(two_pi * u2),   // y
           r2 * std::sin(two_pi * u3));  // z
    q.normalize();
    out.push_back(q);
  }
  return out;
}

// Geodesic distance on SO(3) in radians, in [0, pi]. The absolute value on
// the dot product folds the double cover: q and -q are the same rotation.
inline double orientation_distance(const Quat& a, const Quat& b) {
  const double dot = std::min(1.0, std::abs(a.dot(b)));
  return 2.0 * std::acos(dot);
}

}  // namespace sopp

#endif  // SOPP_ORIENTATIONS_HPP_

#ifndef SOPP_TESTS_SUPPORT_ORACLES_HPP_
#define SOPP_TESTS_SUPPORT_ORACLES_HPP_

// Independent reference implementations and fixtures used by the test suite.
// These deliberately use different algorithms than the library where the
// library result is nontrivial.

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "sopp/common.hpp"
#include "sopp/mesh.hpp"

namespace sopp_tests {

// chi-square critical values at significance 0.001
inline constexpr double kChi2Critical3 = 16.26623619623813;
inline constexpr double kChi2Critical7 = 24.321886347856854;

inline double chi_square_statistic(const std::vector<double>& observed,
                                   const std::vector<double>& expected) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  return stat;
}

// Floyd-Warshall over a dense adjacency matrix (inf = no edge)
inline std::vector<double> floyd_warshall(std::size_t n, std::vector<double> dist) {
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double via = dist[i * n + k] + dist[k * n + j];
        if (via < dist[i * n + j]) dist[i * n + j] = via;
      }
    }
  }
  return dist;
}

// Exhaustive tour search. Costs accumulate left to right in path order so
// that optimal values are comparable bit for bit with a DP that does the
// same. closed fixes node 0 as the start of the cycle.
template <typename Cost>
double brute_force_tour(std::size_t n, Cost&& cost, bool closed) {
  if (n == 0) return 0.0;
  if (n == 1) return 0.0;
  std::vector<std::size_t> perm;
  double best = std::numeric_limits<double>::infinity();
  if (closed) {
    for (std::size_t i = 1; i < n; ++i) perm.push_back(i);
    do {
      double acc = cost(0, perm[0]);
      for (std::size_t i = 0; i + 1 < perm.size(); ++i) {
        acc = acc + cost(perm[i], perm[i + 1]);
      }
      acc = acc + cost(perm.back(), 0);
      if (acc < best) best = acc;
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    for (std::size_t i = 0; i < n; ++i) perm.push_back(i);
    do {
      double acc = 0.0;
      acc = acc + cost(perm[0], perm[1]);
      for (std::size_t i = 1; i + 1 < perm.size(); ++i) {
        acc = acc + cost(perm[i], perm[i + 1]);
      }
      if (acc < best) best = acc;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return best;
}

inline double box_distance_oracle(const sopp::Vec3& q, const sopp::Vec3& lo,
                                  const sopp::Vec3& hi) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double c = std::min(std::max(q[a], lo[a]), hi[a]);
    s += (q[a] - c) * (q[a] - c);
  }
  return std::sqrt(s);
}

inline sopp::TriangleMesh make_quad_plate(double size_x, double size_y,
                                          double z = 0.0) {
  const double hx = size_x / 2.0, hy = size_y / 2.0;
  std::vector<sopp::Vec3> verts = {
      {-hx, -hy, z}, {hx, -hy, z}, {hx, hy, z}, {-hx, hy, z}};
  std::vector<std::array<std::uint32_t, 3>> tris = {{0, 1, 2}, {0, 2, 3}};
  return sopp::TriangleMesh(std::move(verts), std::move(tris));
}

inline sopp::TriangleMesh make_box(const sopp::Vec3& lo, const sopp::Vec3& hi) {
  std::vector<sopp::Vec3> v = {
      {lo.x(), lo.y(), lo.z()}, {hi.x(), lo.y(), lo.z()},
      {hi.x(), hi.y(), lo.z()}, {lo.x(), hi.y(), lo.z()},
      {lo.x(), lo.y(), hi.z()}, {hi.x(), lo.y(), hi.z()},
      {hi.x(), hi.y(), hi.z()}, {lo.x(), hi.y(), hi.z()}};
  std::vector<std::array<std::uint32_t, 3>> t = {
      {0, 2, 1}, {0, 3, 2},   // bottom, normal -z
      {4, 5, 6}, {4, 6, 7},   // top, normal +z
      {0, 1, 5}, {0, 5, 4},   // front, normal -y
      {2, 3, 7}, {2, 7, 6},   // back, normal +y
      {1, 2, 6}, {1, 6, 5},   // right, normal +x
      {3, 0, 4}, {3, 4, 7}};  // left, normal -x
  return sopp::TriangleMesh(std::move(v), std::move(t));
}

inline sopp::TriangleMesh make_tetrahedron() {
  std::vector<sopp::Vec3> v = {
      {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<std::array<std::uint32_t, 3>> t = {
      {0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
  return sopp::TriangleMesh(std::move(v), std::move(t));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sopp_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace sopp_tests

#endif  // SOPP_TESTS_SUPPORT_ORACLES_HPP_

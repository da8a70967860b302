#ifndef SOPP_QUALITY_HPP_
#define SOPP_QUALITY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <vector>

#include "sopp/common.hpp"
#include "sopp/frustum.hpp"
#include "sopp/pose_graph.hpp"
#include "sopp/surface_sampling.hpp"
#include "sopp/visibility.hpp"

namespace sopp {

// Stored quality rates below this threshold are dropped while building the
// matrix; they cannot influence plans at report precision.
inline constexpr double kMinQualityRate = 1e-12;

enum class QualityKind : std::uint8_t {
  coverage = 0,        // binary: counts while the grazing angle allows it
  projected_area = 1,  // cos(angle) / distance^2, the visible area density
};

// Per-observation quality model. Both variants depend on the viewing
// direction and the surface normal only, never on the sensor orientation
// (which instead gates observations through the frustum test).
struct QualityFunction {
  QualityKind kind = QualityKind::coverage;
  double max_angle_deg = 30.0;  // coverage: largest admissible grazing angle
  double min_distance = 0.1;    // projected_area: cutoff below this range

  void validate() const {
    if (kind == QualityKind::coverage) {
      if (!(max_angle_deg >= 0.0 && max_angle_deg <= 180.0)) {
        throw std::invalid_argument("quality: max_angle_deg must lie in [0, 180]");
      }
    } else {
      if (!(min_distance >= 0.0)) {
        throw std::invalid_argument("quality: min_distance must be >= 0");
      }
    }
  }
};

// Observation quality of a surface point seen from a sensor position.
// Coverage is 1 while the angle between the surface normal and the direction
// toward the sensor stays within max_angle_deg (boundary included), else 0.
// Projected area is cos(angle)/r^2, cut to 0 for angles of 90 degrees or
// more, for ranges under min_distance, and for zero range.
inline double quality_rate(const Vec3& point_position, const Vec3& point_normal,
                           const Vec3& view_position, const QualityFunction& fn) {
  fn.validate();
  const Vec3 to_sensor = view_position - point_position;
  const double r = to_sensor.norm();
  if (r == 0.0) return 0.0;
  const double cos_angle = point_normal.dot(to_sensor) / r;

  if (fn.kind == QualityKind::coverage) {
    const double angle = std::acos(std::clamp(cos_angle, -1.0, 1.0));
    return angle <= deg_to_rad(fn.max_angle_deg) ? 1.0 : 0.0;
  }
  if (r < fn.min_distance) return 0.0;
  if (cos_angle <= 0.0) return 0.0;
  return cos_angle / (r * r);
}

// Sparse model-point x pose matrix of quality rates, stored column-major so
// the planner can walk all observations of one pose contiguously.
class QualityMatrix {
 public:
  struct Entry {
    std::uint32_t row;
    double value;
  };

  struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
  };

  QualityMatrix() = default;

  static QualityMatrix from_triplets(std::size_t rows, std::size_t cols,
                                     std::vector<Triplet> triplets) {
    for (const Triplet& t : triplets) {
      if (t.row >= rows || t.col >= cols) {
        throw std::invalid_argument("quality matrix: triplet index out of range");
      }
      if (!(t.value > 0.0)) {
        throw std::invalid_argument("quality matrix: values must be positive");
      }
    }
    std::sort(triplets.begin(), triplets.end(),
              [](const Triplet& a, const Triplet& b) {
                if (a.col != b.col) return a.col < b.col;
                return a.row < b.row;
              });
    for (std::size_t i = 1; i < triplets.size(); ++i) {
      if (triplets[i].row == triplets[i - 1].row &&
          triplets[i].col == triplets[i - 1].col) {
        throw std::invalid_argument("quality matrix: duplicate entry");
      }
    }

    QualityMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.col_start_.assign(cols + 1, 0);
    m.entries_.reserve(triplets.size());
    for (const Triplet& t : triplets) {
      m.col_start_[t.col + 1]++;
      m.entries_.push_back(Entry{t.row, t.value});
    }
    for (std::size_t c = 0; c < cols; ++c) m.col_start_[c + 1] += m.col_start_[c];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return entries_.size(); }

  std::span<const Entry> column(std::size_t col) const {
    return {entries_.data() + col_start_[col], col_start_[col + 1] - col_start_[col]};
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> col_start_;
  std::vector<Entry> entries_;
};

struct QualityBuildStats {
  std::size_t visibility_tests = 0;  // exactly positions x model points
  std::size_t frustum_tests = 0;
  std::size_t entries = 0;
};

// Builds the observation matrix in three passes per position: one ray cast
// per (position, point) pair decides visibility independent of orientation,
// the frustum test then gates each orientation, and the surviving pairs get
// the orientation-independent quality rate. Rates below kMinQualityRate are
// dropped.
inline QualityMatrix build_quality_matrix(const std::vector<ModelPoint>& points,
                                          const PoseGraph& graph,
                                          const TriangleMesh& mesh,
                                          const Frustum& frustum,
                                          const QualityFunction& fn,
                                          QualityBuildStats* stats = nullptr) {
  fn.validate();
  frustum.validate();
  const std::size_t l = graph.position_count();
  const std::size_t s = graph.orientation_count();
  const std::size_t k = points.size();

  const VisibilityTester vis(mesh);
  std::vector<std::vector<QualityMatrix::Triplet>> per_position(l);
  std::atomic<std::size_t> frustum_tests{0};

  parallel_for(l, [&](std::size_t begin, std::size_t end) {
    std::size_t local_frustum = 0;
    for (std::size_t p = begin; p < end; ++p) {
      const Vec3& position = graph.positions[p];
      auto& out = per_position[p];
      for (std::size_t m = 0; m < k; ++m) {
        // zero-range observations have zero quality; skip before the ray cast
        if (position == points[m].position) continue;
        if (!vis.visible(position, points[m].position)) continue;
        double rate = -1.0;  // evaluated on the first surviving orientation
        for (std::size_t o = 0; o < s; ++o) {
          ++local_frustum;
          if (!in_frustum(position, graph.orientations[o], points[m].position,
                          frustum)) {
            continue;
          }
          if (rate < 0.0) {
            rate = quality_rate(points[m].position, points[m].normal, position, fn);
          }
          if (rate < kMinQualityRate) break;
          out.push_back(QualityMatrix::Triplet{
              static_cast<std::uint32_t>(m),
              static_cast<std::uint32_t>(p * s + o), rate});
        }
      }
    }
    frustum_tests.fetch_add(local_frustum);
  });

  std::vector<QualityMatrix::Triplet> triplets;
  std::size_t total = 0;
  for (const auto& chunk : per_position) total += chunk.size();
  triplets.reserve(total);
  for (const auto& chunk : per_position) {
    triplets.insert(triplets.end(), chunk.begin(), chunk.end());
  }

  if (stats) {
    stats->visibility_tests = l * k;
    stats->frustum_tests = frustum_tests.load();
    stats->entries = triplets.size();
  }
  return QualityMatrix::from_triplets(k, l * s, std::move(triplets));
}

// Accumulates the best observed rate per model point; the objective is their
// sum. Marginal gains of further observations never exceed earlier ones,
// which is what makes the greedy machinery sound.
class ObjectiveState {
 public:
  explicit ObjectiveState(std::size_t point_count)
      : best_(point_count, 0.0) {}

  double marginal_gain(const QualityMatrix& q, std::uint32_t pose) const {
    double gain = 0.0;
    for (const auto& e : q.column(pose)) {
      const double current = best_[e.row];
      if (e.value > current) gain += e.value - current;
    }
    return gain;
  }

  // applies the pose and returns the realized gain
  double apply(const QualityMatrix& q, std::uint32_t pose) {
    double gain = 0.0;
    for (const auto& e : q.column(pose)) {
      double& current = best_[e.row];
      if (e.value > current) {
        gain += e.value - current;
        current = e.value;
      }
    }
    total_ += gain;
    return gain;
  }

  double total() const { return total_; }
  const std::vector<double>& accumulators() const { return best_; }

 private:
  std::vector<double> best_;
  double total_ = 0.0;
};

// Objective value of a pose set, independent of order and multiplicity.
inline double total_quality(const QualityMatrix& q,
                            std::span<const std::uint32_t> poses) {
  ObjectiveState state(q.rows());
  for (std::uint32_t v : poses) state.apply(q, v);
  return state.total();
}

// Quality matrix persistence: magic, dimensions, the quality-function
// descriptor, then (row, column, value) triples sorted by row then column.
inline constexpr char kQualityMagic[8] = {'S', 'O', 'P', 'P', 'Q', 'M', 'T', '1'};

inline void save_quality_matrix(const QualityMatrix& m, const QualityFunction& fn,
                                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write quality matrix: " + path.string());
  }
  out.write(kQualityMagic, sizeof(kQualityMagic));
  io::write_le<std::uint64_t>(out, m.rows());
  io::write_le<std::uint64_t>(out, m.cols());
  io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(fn.kind));
  io::write_le<double>(out, fn.max_angle_deg);
  io::write_le<double>(out, fn.min_distance);
  io::write_le<std::uint64_t>(out, m.nonzeros());

  std::vector<QualityMatrix::Triplet> triplets;
  triplets.reserve(m.nonzeros());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    for (const auto& e : m.column(c)) {
      triplets.push_back(QualityMatrix::Triplet{e.row, static_cast<std::uint32_t>(c),
                                                e.value});
    }
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const QualityMatrix::Triplet& a, const QualityMatrix::Triplet& b) {
              if (a.row != b.row) return a.row < b.row;
              return a.col < b.col;
            });
  for (const auto& t : triplets) {
    io::write_le<std::uint32_t>(out, t.row);
    io::write_le<std::uint32_t>(out, t.col);
    io::write_le<double>(out, t.value);
  }
  if (!out) {
    throw std::runtime_error("failed writing quality matrix: " + path.string());
  }
}

struct LoadedQualityMatrix {
  QualityMatrix matrix;
  QualityFunction function;
};

inline LoadedQualityMatrix load_quality_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open quality matrix: " + path.string());
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kQualityMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("bad quality matrix header: " + path.string());
  }
  const auto rows = io::read_le<std::uint64_t>(in);
  const auto cols = io::read_le<std::uint64_t>(in);
  LoadedQualityMatrix out;
  out.function.kind = static_cast<QualityKind>(io::read_le<std::uint8_t>(in));
  out.function.max_angle_deg = io::read_le<double>(in);
  out.function.min_distance = io::read_le<double>(in);
  const auto nnz = io::read_le<std::uint64_t>(in);
  std::vector<QualityMatrix::Triplet> triplets;
  triplets.reserve(nnz);
  for (std::uint64_t i = 0; i < nnz; ++i) {
    QualityMatrix::Triplet t;
    t.row = io::read_le<std::uint32_t>(in);
    t.col = io::read_le<std::uint32_t>(in);
    t.value = io::read_le<double>(in);
    triplets.push_back(t);
  }
  if (!in) {
    throw std::runtime_error("truncated quality matrix: " + path.string());
  }
  out.matrix = QualityMatrix::from_triplets(rows, cols, std::move(triplets));
  return out;
}

}  // namespace sopp

#endif  // SOPP_QUALITY_HPP_

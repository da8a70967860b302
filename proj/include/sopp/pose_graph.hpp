#ifndef SOPP_POSE_GRAPH_HPP_
#define SOPP_POSE_GRAPH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sopp/common.hpp"
#include "sopp/orientations.hpp"

namespace sopp {

// A view pose indexes into the position grid and the orientation set.
struct ViewPose {
  std::uint32_t position_index = 0;
  std::uint32_t orientation_index = 0;

  friend bool operator==(const ViewPose&, const ViewPose&) = default;
};

// Workspace constraints of the robot. Null members mean unrestricted. Callers
// must keep the predicates consistent: a reachable pose implies a reachable
// position.
struct ReachabilityPredicate {
  std::function<bool(const Vec3&)> position_reachable;
  std::function<bool(const Vec3&, const Quat&)> pose_reachable;

  bool check_position(const Vec3& p) const {
    return !position_reachable || position_reachable(p);
  }
  bool check_pose(const Vec3& p, const Quat& q) const {
    return !pose_reachable || pose_reachable(p, q);
  }
};

// Undirected adjacency over grid positions.
struct FiberGraph {
  std::vector<std::vector<std::uint32_t>> neighbors;
  std::size_t edge_count = 0;

  std::size_t node_count() const { return neighbors.size(); }
};

namespace detail {

struct GridKey {
  long x, y, z;
  friend bool operator==(const GridKey&, const GridKey&) = default;
};

struct GridKeyHash {
  std::size_t operator()(const GridKey& k) const {
    Fnv1a h;
    h.update_value(k.x);
    h.update_value(k.y);
    h.update_value(k.z);
    return static_cast<std::size_t>(h.digest());
  }
};

}  // namespace detail

// Connects every position to its existing grid neighbors in the full
// 26-neighborhood (axis steps, face diagonals and space diagonals). Positions
// must sit on a regular grid with the given spacing to within 1e-9 m.
inline FiberGraph build_fiber_graph(const std::vector<Vec3>& positions,
                                    double resolution) {
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("build_fiber_graph: resolution must be > 0");
  }
  FiberGraph graph;
  graph.neighbors.resize(positions.size());
  if (positions.empty()) return graph;

  Vec3 anchor = positions.front();
  for (const Vec3& p : positions) anchor = anchor.cwiseMin(p);

  std::unordered_map<detail::GridKey, std::uint32_t, detail::GridKeyHash> cells;
  cells.reserve(positions.size());
  std::vector<detail::GridKey> keys(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    detail::GridKey key{};
    for (int a = 0; a < 3; ++a) {
      const double rel = (positions[i][a] - anchor[a]) / resolution;
      const long k = std::lround(rel);
      if (std::abs(positions[i][a] - (anchor[a] + static_cast<double>(k) * resolution)) > 1e-9) {
        throw std::runtime_error(
            "build_fiber_graph: position is not grid-aligned within 1e-9 m");
      }
      (a == 0 ? key.x : a == 1 ? key.y : key.z) = k;
    }
    keys[i] = key;
    if (!cells.emplace(key, static_cast<std::uint32_t>(i)).second) {
      throw std::runtime_error("build_fiber_graph: duplicate grid position");
    }
  }

  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dz = -1; dz <= 1; ++dz) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const detail::GridKey probe{keys[i].x + dx, keys[i].y + dy,
                                      keys[i].z + dz};
          const auto it = cells.find(probe);
          if (it != cells.end()) graph.neighbors[i].push_back(it->second);
        }
      }
    }
    std::sort(graph.neighbors[i].begin(), graph.neighbors[i].end());
    graph.edge_count += graph.neighbors[i].size();
  }
  graph.edge_count /= 2;
  return graph;
}

struct FilterResult {
  std::vector<std::uint32_t> retained;  // ascending indices into the input
  std::size_t removed_unreachable = 0;
  std::size_t removed_disconnected = 0;
};

// Drops positions the robot cannot reach, then keeps only the largest
// connected component of what survives (count reported, ties resolved toward
// the component with the smallest index).
inline FilterResult filter_unreachable(const std::vector<Vec3>& positions,
                                       const FiberGraph& graph,
                                       const ReachabilityPredicate& reach) {
  if (graph.node_count() != positions.size()) {
    throw std::invalid_argument("filter_unreachable: graph/position size mismatch");
  }
  const std::size_t n = positions.size();
  std::vector<char> alive(n, 0);
  std::size_t alive_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (reach.check_position(positions[i])) {
      alive[i] = 1;
      ++alive_count;
    }
  }

  FilterResult result;
  result.removed_unreachable = n - alive_count;
  if (alive_count == 0) {
    throw std::runtime_error("filter_unreachable: no reachable positions");
  }

  std::vector<int> component(n, -1);
  std::vector<std::uint32_t> queue;
  int best_component = -1;
  std::size_t best_size = 0;
  int next_component = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (!alive[root] || component[root] >= 0) continue;
    const int id = next_component++;
    std::size_t size = 0;
    queue.clear();
    queue.push_back(static_cast<std::uint32_t>(root));
    component[root] = id;
    while (!queue.empty()) {
      const std::uint32_t u = queue.back();
      queue.pop_back();
      ++size;
      for (std::uint32_t v : graph.neighbors[u]) {
        if (alive[v] && component[v] < 0) {
          component[v] = id;
          queue.push_back(v);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_component = id;
    }
  }

  result.removed_disconnected = alive_count - best_size;
  result.retained.reserve(best_size);
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i] && component[i] == best_component) {
      result.retained.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return result;
}

// Exact all-pairs shortest paths over the fiber graph with Euclidean edge
// weights. One Dijkstra pass per source; with non-negative weights this is
// Johnson's algorithm without the reweighting step, O(l^2 log l + l * e).
inline DenseMatrix all_pairs_shortest(const FiberGraph& graph,
                                      const std::vector<Vec3>& positions) {
  if (graph.node_count() != positions.size()) {
    throw std::invalid_argument("all_pairs_shortest: graph/position size mismatch");
  }
  const std::size_t n = positions.size();
  DenseMatrix dist(n, n, std::numeric_limits<double>::infinity());
  std::atomic<bool> disconnected{false};

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (std::size_t src = begin; src < end; ++src) {
      double* row = &dist(src, 0);
      row[src] = 0.0;
      heap.push({0.0, static_cast<std::uint32_t>(src)});
      while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > row[u]) continue;
        for (std::uint32_t v : graph.neighbors[u]) {
          const double w = (positions[u] - positions[v]).norm();
          const double candidate = d + w;
          if (candidate < row[v]) {
            row[v] = candidate;
            heap.push({candidate, v});
          }
        }
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (std::isinf(row[j])) {
          disconnected.store(true);
          break;
        }
      }
    }
  });

  if (disconnected.load()) {
    throw std::runtime_error("all_pairs_shortest: fiber graph is disconnected");
  }
  // per-source relaxations can disagree in the last ulp across directions;
  // the metric is undirected, so mirror the upper triangle
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) dist(j, i) = dist(i, j);
  }
  return dist;
}

// Geodesic distance table over the orientation set.
inline DenseMatrix orientation_metric(const std::vector<Quat>& orientations) {
  const std::size_t s = orientations.size();
  DenseMatrix m(s, s, 0.0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i + 1; j < s; ++j) {
      const double d = orientation_distance(orientations[i], orientations[j]);
      m(i, j) = d;
      m(j, i) = d;
    }
  }
  return m;
}

// Discretized pose space: the product of reachable grid positions and sampled
// orientations, with cached pairwise metrics for both factors. Pose ids
// enumerate the product in position-major order.
struct PoseGraph {
  std::vector<Vec3> positions;
  std::vector<Quat> orientations;
  FiberGraph fiber;
  DenseMatrix travel;   // shortest-path distances between positions
  DenseMatrix angular;  // geodesic distances between orientations
  double beta = 0.01;

  std::size_t position_count() const { return positions.size(); }
  std::size_t orientation_count() const { return orientations.size(); }
  std::size_t pose_count() const { return positions.size() * orientations.size(); }

  ViewPose pose(std::uint32_t id) const {
    const auto s = static_cast<std::uint32_t>(orientations.size());
    return ViewPose{id / s, id % s};
  }
  std::uint32_t id(const ViewPose& p) const {
    return p.position_index * static_cast<std::uint32_t>(orientations.size()) +
           p.orientation_index;
  }

  const Vec3& position_of(std::uint32_t pose_id) const {
    return positions[pose(pose_id).position_index];
  }
  const Quat& orientation_of(std::uint32_t pose_id) const {
    return orientations[pose(pose_id).orientation_index];
  }

  // Edge cost between poses: convex blend of translation and rotation
  // distance. Zero exactly on identical poses, symmetric, and a metric when
  // both factors are.
  double pose_cost(std::uint32_t a, std::uint32_t b) const {
    const ViewPose pa = pose(a), pb = pose(b);
    return (1.0 - beta) * travel(pa.position_index, pb.position_index) +
           beta * angular(pa.orientation_index, pb.orientation_index);
  }
};

struct PoseGraphBuild {
  PoseGraph graph;
  std::size_t removed_unreachable = 0;
  std::size_t removed_disconnected = 0;
};

// Assembles the pose graph from candidate grid positions: reachability
// filtering, largest-component pruning, then the two metric tables.
inline PoseGraphBuild build_pose_graph(const std::vector<Vec3>& candidates,
                                       std::vector<Quat> orientations,
                                       double resolution, double beta,
                                       const ReachabilityPredicate& reach) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("build_pose_graph: beta must lie in [0, 1]");
  }
  if (orientations.empty()) {
    throw std::invalid_argument("build_pose_graph: no orientations");
  }

  const FiberGraph full = build_fiber_graph(candidates, resolution);
  const FilterResult filtered = filter_unreachable(candidates, full, reach);

  PoseGraphBuild out;
  out.removed_unreachable = filtered.removed_unreachable;
  out.removed_disconnected = filtered.removed_disconnected;

  out.graph.positions.reserve(filtered.retained.size());
  for (std::uint32_t idx : filtered.retained) {
    out.graph.positions.push_back(candidates[idx]);
  }
  out.graph.orientations = std::move(orientations);
  out.graph.fiber = build_fiber_graph(out.graph.positions, resolution);
  out.graph.travel = all_pairs_shortest(out.graph.fiber, out.graph.positions);
  out.graph.angular = orientation_metric(out.graph.orientations);
  out.graph.beta = beta;
  return out;
}

}  // namespace sopp

#endif  // SOPP_POSE_GRAPH_HPP_

#ifndef SOPP_TSP_HPP_
#define SOPP_TSP_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "sopp/common.hpp"
#include "sopp/pose_graph.hpp"

namespace sopp {

// Exact DP is O(2^n n^2); past this size it is not worth the memory.
inline constexpr std::size_t kExactTourLimit = 15;
// The `auto` estimator switches from exact DP to nearest-neighbor here.
inline constexpr std::size_t kAutoExactLimit = 12;

enum class TourPolicy { nearest_neighbor, exact, automatic };

// Budgeted inspection cost model: C(X) = c(X) + alpha * |X|,
// where c is the tour cost and alpha the fixed per-measurement cost. beta
// blends translation against rotation inside pose_cost and must match the
// pose graph it is used with.
struct CostModel {
  double alpha = 0.05;
  double beta = 0.01;
  double budget = 10.0;
  bool closed_tour = true;

  void validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("cost model: alpha must be >= 0");
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw std::invalid_argument("cost model: beta must lie in [0, 1]");
    }
    if (!(budget >= 0.0)) throw std::invalid_argument("cost model: budget must be >= 0");
  }
};

struct TourEstimate {
  enum class Kind { nearest_neighbor, exact, held_karp_bound };

  std::vector<std::uint32_t> order;  // visit order; empty for pure bounds
  double travel = 0.0;
  Kind kind = Kind::nearest_neighbor;
};

// Pairwise pose costs for a subset, assembled straight from the two cached
// metric tables. Exact to machine precision against direct pose_cost calls
// because it is the same expression.
inline DenseMatrix subset_cost_matrix(std::span<const std::uint32_t> poses,
                                      const PoseGraph& graph) {
  const std::size_t m = poses.size();
  DenseMatrix d(m, m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double c = graph.pose_cost(poses[i], poses[j]);
      d(i, j) = c;
      d(j, i) = c;
    }
  }
  return d;
}

// Greedy nearest-neighbor walk over indices [0, n): start at 0, repeatedly
// hop to the cheapest unvisited index (ties toward the lowest index), close
// the loop if requested. cost(i, j) supplies pairwise costs.
template <typename CostFn>
double nn_travel(std::size_t n, CostFn&& cost, bool closed,
                 std::vector<std::uint32_t>* order_out = nullptr) {
  if (order_out) order_out->clear();
  if (n == 0) return 0.0;
  std::vector<char> visited(n, 0);
  std::uint32_t current = 0;
  visited[0] = 1;
  if (order_out) order_out->push_back(0);
  double total = 0.0;
  for (std::size_t step = 1; step < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t pick = 0;
    for (std::uint32_t j = 0; j < n; ++j) {
      if (!visited[j] && cost(current, j) < best) {
        best = cost(current, j);
        pick = j;
      }
    }
    total += best;
    visited[pick] = 1;
    current = pick;
    if (order_out) order_out->push_back(pick);
  }
  if (closed && n > 1) total += cost(current, 0);
  return total;
}

inline TourEstimate nn_tour(const DenseMatrix& d, bool closed = true) {
  TourEstimate est;
  est.kind = TourEstimate::Kind::nearest_neighbor;
  est.travel = nn_travel(
      d.rows(), [&](std::uint32_t i, std::uint32_t j) { return d(i, j); }, closed,
      &est.order);
  return est;
}

namespace detail {

// Held-Karp style DP over subsets, fixed start at index 0. Costs accumulate
// left to right along the path, the same order a sequential walk would use.
inline TourEstimate exact_tour_from_zero(const DenseMatrix& d, bool closed) {
  const std::size_t n = d.rows();
  TourEstimate est;
  est.kind = TourEstimate::Kind::exact;
  if (n == 0) return est;
  est.order.push_back(0);
  if (n == 1) return est;

  const std::size_t m = n - 1;  // nodes 1..n-1 mapped to bits 0..m-1
  const std::size_t full = (std::size_t{1} << m) - 1;
  std::vector<double> dp((full + 1) * m, std::numeric_limits<double>::infinity());
  std::vector<std::int8_t> parent((full + 1) * m, -1);
  for (std::size_t j = 0; j < m; ++j) {
    dp[(std::size_t{1} << j) * m + j] = d(0, j + 1);
  }
  for (std::size_t mask = 1; mask <= full; ++mask) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!(mask & (std::size_t{1} << j))) continue;
      const double cur = dp[mask * m + j];
      if (!(cur < std::numeric_limits<double>::infinity())) continue;
      for (std::size_t i = 0; i < m; ++i) {
        if (mask & (std::size_t{1} << i)) continue;
        const double cand = cur + d(j + 1, i + 1);
        const std::size_t idx = (mask | (std::size_t{1} << i)) * m + i;
        if (cand < dp[idx]) {
          dp[idx] = cand;
          parent[idx] = static_cast<std::int8_t>(j);
        }
      }
    }
  }

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double total = dp[full * m + j] + (closed ? d(j + 1, 0) : 0.0);
    if (total < best) {
      best = total;
      best_j = j;
    }
  }
  est.travel = best;

  std::vector<std::uint32_t> tail;
  std::size_t mask = full, j = best_j;
  while (true) {
    tail.push_back(static_cast<std::uint32_t>(j + 1));
    const std::int8_t p = parent[mask * m + j];
    mask &= ~(std::size_t{1} << j);
    if (p < 0) break;
    j = static_cast<std::size_t>(p);
  }
  est.order.insert(est.order.end(), tail.rbegin(), tail.rend());
  return est;
}

}  // namespace detail

// Optimal tour by dynamic programming over subsets. Open walks go through a
// zero-cost virtual depot, which turns the free-endpoint path problem into a
// closed tour one node larger.
inline TourEstimate exact_tsp(const DenseMatrix& d, bool closed = true) {
  const std::size_t n = d.rows();
  if (n > kExactTourLimit) {
    throw std::invalid_argument(
        "exact_tsp: instance too large for exact dynamic programming (limit " +
        std::to_string(kExactTourLimit) + ")");
  }
  if (closed || n <= 1) return detail::exact_tour_from_zero(d, closed);

  DenseMatrix virt(n + 1, n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) virt(i + 1, j + 1) = d(i, j);
  }
  TourEstimate tour = detail::exact_tour_from_zero(virt, true);
  TourEstimate est;
  est.kind = TourEstimate::Kind::exact;
  est.travel = tour.travel;
  est.order.reserve(n);
  for (std::uint32_t v : tour.order) {
    if (v != 0) est.order.push_back(v - 1);
  }
  return est;
}

namespace detail {

// Minimum 1-tree under node potentials pi: MST over nodes 1..n-1 plus the two
// cheapest edges incident to node 0. Returns the potential-shifted weight and
// fills per-node degrees.
inline double one_tree(const DenseMatrix& d, const std::vector<double>& pi,
                       std::vector<int>& degree) {
  const std::size_t n = d.rows();
  degree.assign(n, 0);
  const auto cost = [&](std::size_t i, std::size_t j) {
    return d(i, j) + pi[i] + pi[j];
  };

  // Prim over {1..n-1}
  std::vector<char> in_tree(n, 0);
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, 1);
  in_tree[1] = 1;
  for (std::size_t j = 2; j < n; ++j) key[j] = cost(1, j);
  double total = 0.0;
  for (std::size_t added = 2; added < n; ++added) {
    std::size_t pick = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 2; j < n; ++j) {
      if (!in_tree[j] && key[j] < best) {
        best = key[j];
        pick = j;
      }
    }
    in_tree[pick] = 1;
    total += best;
    ++degree[pick];
    ++degree[parent[pick]];
    for (std::size_t j = 2; j < n; ++j) {
      if (!in_tree[j] && cost(pick, j) < key[j]) {
        key[j] = cost(pick, j);
        parent[j] = pick;
      }
    }
  }

  // two cheapest edges out of node 0
  std::size_t e1 = 0, e2 = 0;
  double c1 = std::numeric_limits<double>::infinity();
  double c2 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < n; ++j) {
    const double c = cost(0, j);
    if (c < c1) {
      c2 = c1;
      e2 = e1;
      c1 = c;
      e1 = j;
    } else if (c < c2) {
      c2 = c;
      e2 = j;
    }
  }
  total += c1 + c2;
  degree[0] = 2;
  ++degree[e1];
  ++degree[e2];

  double pi_sum = 0.0;
  for (double p : pi) pi_sum += p;
  return total - 2.0 * pi_sum;
}

}  // namespace detail

// Held-Karp 1-tree lower bound on the optimal closed tour, by subgradient
// ascent on node potentials. Step schedule: initial step is the first 1-tree
// weight over 2n, halved after every 10 iterations without improvement.
inline double held_karp_bound(const DenseMatrix& d, int iterations = 100) {
  const std::size_t n = d.rows();
  if (n <= 1) return 0.0;
  if (n == 2) return d(0, 1) + d(1, 0);

  std::vector<double> pi(n, 0.0);
  std::vector<int> degree;
  double best = 0.0;
  double step = 0.0;
  int stale = 0;
  for (int it = 0; it < iterations; ++it) {
    const double w = detail::one_tree(d, pi, degree);
    if (it == 0) {
      best = w;
      step = w > 0.0 ? w / (2.0 * static_cast<double>(n)) : 0.0;
      if (step == 0.0) break;  // degenerate all-zero metric
    } else if (w > best) {
      best = w;
      stale = 0;
    } else if (++stale >= 10) {
      step *= 0.5;
      stale = 0;
    }
    bool tour = true;
    for (std::size_t i = 0; i < n; ++i) tour &= degree[i] == 2;
    if (tour) break;  // the 1-tree is itself a tour: bound is tight
    for (std::size_t i = 0; i < n; ++i) {
      pi[i] += step * static_cast<double>(degree[i] - 2);
    }
  }
  return best;
}

// Minimum spanning tree weight; a lower bound for open walks.
inline double mst_cost(const DenseMatrix& d) {
  const std::size_t n = d.rows();
  if (n <= 1) return 0.0;
  std::vector<char> in_tree(n, 0);
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  in_tree[0] = 1;
  for (std::size_t j = 1; j < n; ++j) key[j] = d(0, j);
  double total = 0.0;
  for (std::size_t added = 1; added < n; ++added) {
    std::size_t pick = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < n; ++j) {
      if (!in_tree[j] && key[j] < best) {
        best = key[j];
        pick = j;
      }
    }
    in_tree[pick] = 1;
    total += best;
    for (std::size_t j = 1; j < n; ++j) {
      if (!in_tree[j] && d(pick, j) < key[j]) key[j] = d(pick, j);
    }
  }
  return total;
}

// Lower bound matching the tour convention: 1-tree bound for closed tours,
// MST weight for open walks.
inline double tour_lower_bound(const DenseMatrix& d, bool closed,
                               int iterations = 100) {
  return closed ? held_karp_bound(d, iterations) : mst_cost(d);
}

// Tour over a pose subset under the requested estimator policy. `automatic`
// uses exact DP up to kAutoExactLimit poses and nearest-neighbor beyond.
inline TourEstimate planned_tour(std::span<const std::uint32_t> poses,
                                 const PoseGraph& graph, TourPolicy policy,
                                 bool closed) {
  const std::size_t m = poses.size();
  const bool use_exact =
      policy == TourPolicy::exact ||
      (policy == TourPolicy::automatic && m <= kAutoExactLimit);
  TourEstimate est;
  if (m <= 1) {
    est.kind = TourEstimate::Kind::exact;
    est.order.assign(poses.begin(), poses.end());
    return est;
  }
  const DenseMatrix d = subset_cost_matrix(poses, graph);
  est = use_exact ? exact_tsp(d, closed) : nn_tour(d, closed);
  for (std::uint32_t& v : est.order) v = poses[v];
  return est;
}

// Full solution cost C(X) = c(X) + alpha * |X| with c from the chosen
// estimator. Empty sets cost 0; singletons cost alpha.
inline double walk_cost(std::span<const std::uint32_t> poses,
                        const PoseGraph& graph, const CostModel& model,
                        TourPolicy policy) {
  return planned_tour(poses, graph, policy, model.closed_tour).travel +
         model.alpha * static_cast<double>(poses.size());
}

}  // namespace sopp

#endif  // SOPP_TSP_HPP_

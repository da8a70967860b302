#ifndef SOPP_PLANNER_HPP_
#define SOPP_PLANNER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sopp/quality.hpp"
#include "sopp/tsp.hpp"

namespace sopp {

// A sweep whose quality improvement stays below this is considered converged.
inline constexpr double kSweepTolerance = 1e-12;

// One budgeted inspection-planning instance. Non-owning: the quality matrix
// and pose graph must outlive the planner calls.
struct Problem {
  const QualityMatrix* quality = nullptr;
  const PoseGraph* graph = nullptr;
  CostModel cost;
  const ReachabilityPredicate* reachability = nullptr;  // null: unrestricted
  TourPolicy policy = TourPolicy::automatic;
  // Diagnostic variant of the reference bound: increment the product with the
  // full cost C instead of the travel cost c.
  bool opt_full_cost_increments = false;

  void validate() const {
    if (!quality || !graph) {
      throw std::invalid_argument("problem: quality matrix and pose graph required");
    }
    if (quality->cols() != graph->pose_count()) {
      throw std::invalid_argument("problem: quality matrix columns != pose count");
    }
    if (cost.beta != graph->beta) {
      throw std::invalid_argument("problem: cost model beta != pose graph beta");
    }
    cost.validate();
  }

  bool pose_admissible(std::uint32_t v) const {
    return !reachability ||
           reachability->check_pose(graph->position_of(v), graph->orientation_of(v));
  }
};

struct TraceStep {
  std::vector<std::uint32_t> poses;  // X_k in insertion order
  double f = 0.0;                    // objective value
  double travel = 0.0;               // tour cost c(X_k)
  double total = 0.0;                // full cost C(X_k)
};

// Greedy solution prefix chain {X_1, ..., X_t, X_{t+1}}. When the run ended
// by exceeding the budget, the last step is the violating one.
struct SolutionTrace {
  std::vector<TraceStep> steps;
  bool violated = false;
};

struct PlanResult {
  std::vector<std::uint32_t> poses;  // feasible solution, insertion order
  double objective = 0.0;
  SolutionTrace trace;
  std::vector<std::string> warnings;
};

namespace detail {

// Nearest-neighbor travel of the working set plus one extra pose appended.
inline double nn_travel_with_extra(const std::vector<std::uint32_t>& xs,
                                   std::uint32_t extra, const PoseGraph& graph,
                                   bool closed) {
  const std::size_t m = xs.size() + 1;
  const auto id = [&](std::uint32_t i) {
    return i < xs.size() ? xs[i] : extra;
  };
  return nn_travel(
      m,
      [&](std::uint32_t i, std::uint32_t j) {
        return graph.pose_cost(id(i), id(j));
      },
      closed);
}

inline double nn_travel_of(const std::vector<std::uint32_t>& xs,
                           const PoseGraph& graph, bool closed) {
  return nn_travel(
      xs.size(),
      [&](std::uint32_t i, std::uint32_t j) {
        return graph.pose_cost(xs[i], xs[j]);
      },
      closed);
}

}  // namespace detail

// Generalized cost-benefit greedy. Repeatedly adds the pose maximizing
// marginal gain over incremental nearest-neighbor cost while the solution
// cost (auto estimator) stays within budget, then removes the violating
// element. The recorded trace keeps the violating step for the reference
// bound. Ties break toward larger gain, then the lower pose id; poses failing
// the reachability predicate are rejected lazily at selection time and stay
// excluded for the run.
inline PlanResult gcb(const Problem& problem) {
  problem.validate();
  const QualityMatrix& q = *problem.quality;
  const PoseGraph& graph = *problem.graph;
  const std::size_t n = graph.pose_count();
  const double budget = problem.cost.budget;
  const double alpha = problem.cost.alpha;
  const bool closed = problem.cost.closed_tour;

  PlanResult result;
  if (!(budget > 0.0)) {
    result.warnings.push_back("gcb: no feasible nonempty solution (budget <= 0)");
    return result;
  }

  ObjectiveState state(q.rows());
  std::vector<char> excluded(n, 0);  // selected or rejected
  std::vector<std::uint32_t> xs;
  std::vector<double> gains(n, 0.0);
  bool gains_exhausted = false;  // once all gains hit zero they stay zero

  while (true) {
    double max_gain = 0.0;
    if (!gains_exhausted) {
      parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
          gains[v] = excluded[v]
                         ? -1.0
                         : state.marginal_gain(q, static_cast<std::uint32_t>(v));
        }
      });
      for (std::size_t v = 0; v < n; ++v) max_gain = std::max(max_gain, gains[v]);
      if (max_gain <= 0.0) gains_exhausted = true;
    }

    if (gains_exhausted && xs.empty()) {
      result.warnings.push_back(
          "gcb: no feasible nonempty solution (no pose has positive gain)");
      return result;
    }

    const double base_travel = detail::nn_travel_of(xs, graph, closed);
    std::uint32_t chosen = 0;
    bool have_chosen = false;
    bool all_candidates_rejected = false;

    if (!gains_exhausted) {
      std::vector<std::uint32_t> cands;
      for (std::size_t v = 0; v < n; ++v) {
        if (gains[v] > 0.0) cands.push_back(static_cast<std::uint32_t>(v));
      }
      std::vector<double> ratios(cands.size());
      parallel_for(cands.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const double inc_cost =
              detail::nn_travel_with_extra(xs, cands[i], graph, closed) -
              base_travel + alpha;
          ratios[i] = inc_cost > 0.0
                          ? gains[cands[i]] / inc_cost
                          : std::numeric_limits<double>::infinity();
        }
      });
      while (!cands.empty()) {
        std::size_t best = 0;
        bool have = false;
        for (std::size_t i = 0; i < cands.size(); ++i) {
          if (ratios[i] < 0.0) continue;  // struck by reachability
          if (!have || ratios[i] > ratios[best] ||
              (ratios[i] == ratios[best] &&
               (gains[cands[i]] > gains[cands[best]] ||
                (gains[cands[i]] == gains[cands[best]] &&
                 cands[i] < cands[best])))) {
            best = i;
            have = true;
          }
        }
        if (!have) {
          // every positive-gain candidate was rejected as unreachable; gains
          // must be re-evaluated against the shrunken candidate set
          all_candidates_rejected = true;
          break;
        }
        if (!problem.pose_admissible(cands[best])) {
          excluded[cands[best]] = 1;
          ratios[best] = -1.0;
          continue;
        }
        chosen = cands[best];
        have_chosen = true;
        break;
      }
    } else {
      // all remaining gains are zero: every ratio is 0/dC. Poses with dC = 0
      // are skipped entirely; the rest tie at ratio 0 and fall back to the
      // lowest id.
      for (std::size_t v = 0; v < n && !have_chosen; ++v) {
        if (excluded[v]) continue;
        const std::uint32_t cand = static_cast<std::uint32_t>(v);
        const double inc_cost =
            detail::nn_travel_with_extra(xs, cand, graph, closed) - base_travel +
            alpha;
        if (inc_cost <= 0.0) continue;
        if (!problem.pose_admissible(cand)) {
          excluded[v] = 1;
          continue;
        }
        chosen = cand;
        have_chosen = true;
      }
    }

    if (!have_chosen) {
      if (all_candidates_rejected) continue;
      break;  // candidates exhausted without violating
    }

    excluded[chosen] = 1;
    xs.push_back(chosen);
    state.apply(q, chosen);

    TraceStep step;
    step.poses = xs;
    step.f = state.total();
    step.travel = planned_tour(xs, graph, TourPolicy::automatic, closed).travel;
    step.total = step.travel + alpha * static_cast<double>(xs.size());
    result.trace.steps.push_back(std::move(step));

    if (result.trace.steps.back().total > budget) {
      result.trace.violated = true;
      break;
    }
  }

  if (result.trace.violated) xs.pop_back();

  // the trace is pinned to the auto estimator; under a forced policy the
  // final solution must still fit the budget it will be reported with
  if (problem.policy != TourPolicy::automatic) {
    while (!xs.empty() &&
           walk_cost(xs, graph, problem.cost, problem.policy) > budget) {
      xs.pop_back();
      result.warnings.push_back(
          "gcb: dropped a pose to stay feasible under the configured estimator");
    }
  }

  if (xs.empty() && !result.warnings.size()) {
    result.warnings.push_back("gcb: no feasible nonempty solution");
  }
  result.poses = xs;
  result.objective = total_quality(q, xs);
  return result;
}

struct OptBound {
  double value = 0.0;
  std::vector<std::string> warnings;
};

// Reference upper bound computed from a greedy trace:
//   OPT = f(X_{t+1}) / (1 - prod_{k=2}^{t+1} (1 - (c(X_k) - c(X_{k-1})) / B)).
// Increments use the travel cost c; set full_cost_increments for the
// diagnostic variant with C increments.
inline OptBound opt_bound(const SolutionTrace& trace, double budget,
                          bool full_cost_increments = false) {
  OptBound out;
  if (trace.steps.empty()) {
    out.warnings.push_back("opt_bound: empty trace, bound is 0");
    return out;
  }
  if (!trace.violated) {
    // the whole candidate set fit into the budget: the achieved value is the
    // optimum over the discretization
    out.value = trace.steps.back().f;
    out.warnings.push_back(
        "opt_bound: budget never violated, bound equals achieved quality");
    return out;
  }
  if (trace.steps.size() == 1) {
    out.value = trace.steps.front().f;
    out.warnings.push_back("opt_bound: first pose already violates the budget");
    return out;
  }
  double prod = 1.0;
  for (std::size_t k = 1; k < trace.steps.size(); ++k) {
    const double inc =
        full_cost_increments
            ? trace.steps[k].total - trace.steps[k - 1].total
            : trace.steps[k].travel - trace.steps[k - 1].travel;
    prod *= 1.0 - inc / budget;
  }
  const double denom = 1.0 - prod;
  if (!(denom > 0.0)) {
    out.value = std::numeric_limits<double>::infinity();
    out.warnings.push_back("opt_bound: degenerate trace, nonpositive denominator");
    return out;
  }
  out.value = trace.steps.back().f / denom;
  return out;
}

struct SwapCandidate {
  std::uint32_t pose = 0;
  double gain = 0.0;             // marginal quality of adding the pose
  double cost_lower_bound = 0.0;  // lower bound on the resulting solution cost
};

struct LazyArgmaxResult {
  bool found = false;
  std::uint32_t pose = 0;
  double gain = 0.0;
  std::size_t exact_evaluations = 0;
};

namespace detail {

// Descend candidates by gain; prune via the lower bound, evaluate the exact
// cost only when the bound allows, accept the first feasible candidate.
// admit() may veto candidates (reachability) before any cost work.
template <typename BoundFn, typename ExactFn, typename AdmitFn>
LazyArgmaxResult lazy_argmax_impl(std::vector<std::pair<double, std::uint32_t>> ranked,
                                  BoundFn&& bound, ExactFn&& exact, double budget,
                                  AdmitFn&& admit) {
  std::sort(ranked.begin(), ranked.end(),
            [](const std::pair<double, std::uint32_t>& a,
               const std::pair<double, std::uint32_t>& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  LazyArgmaxResult res;
  for (const auto& [gain, pose] : ranked) {
    if (!admit(pose)) continue;
    if (bound(pose) > budget) continue;  // certainly infeasible, skip for good
    ++res.exact_evaluations;
    if (exact(pose) <= budget) {
      res.found = true;
      res.pose = pose;
      res.gain = gain;
      return res;
    }
  }
  return res;
}

}  // namespace detail

// Best feasible swap candidate: maximal gain whose exact-policy cost fits the
// budget, with lower-bound pruning keeping exact evaluations to a minimum.
// Returns found = false when every candidate is infeasible.
inline LazyArgmaxResult lazy_argmax(
    std::span<const SwapCandidate> candidates,
    const std::function<double(std::uint32_t)>& exact_cost, double budget) {
  std::vector<std::pair<double, std::uint32_t>> ranked;
  ranked.reserve(candidates.size());
  std::vector<double> bounds;
  std::uint32_t max_pose = 0;
  for (const auto& c : candidates) max_pose = std::max(max_pose, c.pose);
  bounds.assign(static_cast<std::size_t>(max_pose) + 1, 0.0);
  for (const auto& c : candidates) {
    ranked.emplace_back(c.gain, c.pose);
    bounds[c.pose] = c.cost_lower_bound;
  }
  return detail::lazy_argmax_impl(
      std::move(ranked), [&](std::uint32_t v) { return bounds[v]; }, exact_cost,
      budget, [](std::uint32_t) { return true; });
}

struct GcbPlusResult {
  std::vector<std::uint32_t> poses;
  double objective = 0.0;
  std::size_t sweeps = 0;
  std::size_t exact_evaluations = 0;
  std::vector<std::string> warnings;
};

// Swap-improvement pass over a feasible solution. Elements are visited in
// insertion order; each is removed and the best feasible replacement from the
// whole pose set (itself included) is swapped in via lazy_argmax. Full sweeps
// repeat until one no longer improves the objective. The result never loses
// quality: the removed element is always among the candidates, so the
// accepted replacement gains at least as much.
inline GcbPlusResult gcb_plus(std::vector<std::uint32_t> xs, const Problem& problem) {
  problem.validate();
  const QualityMatrix& q = *problem.quality;
  const PoseGraph& graph = *problem.graph;
  const std::size_t n = graph.pose_count();
  const double budget = problem.cost.budget;
  const double alpha = problem.cost.alpha;
  const bool closed = problem.cost.closed_tour;

  GcbPlusResult result;
  if (walk_cost(xs, graph, problem.cost, problem.policy) > budget) {
    throw std::invalid_argument("gcb_plus: initial solution exceeds the budget");
  }

  std::vector<char> rejected(n, 0);
  std::vector<char> in_working(n, 0);
  std::vector<double> gains(n, 0.0);
  double previous_total = total_quality(q, xs);

  while (true) {
    ++result.sweeps;
    for (std::size_t idx = 0; idx < xs.size(); ++idx) {
      std::vector<std::uint32_t> minus;
      minus.reserve(xs.size() - 1);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i != idx) minus.push_back(xs[i]);
      }
      ObjectiveState state(q.rows());
      for (std::uint32_t v : minus) state.apply(q, v);

      std::fill(in_working.begin(), in_working.end(), 0);
      for (std::uint32_t v : minus) in_working[v] = 1;

      parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
          gains[v] = (in_working[v] || rejected[v])
                         ? -1.0
                         : state.marginal_gain(q, static_cast<std::uint32_t>(v));
        }
      });
      std::vector<std::pair<double, std::uint32_t>> ranked;
      ranked.reserve(n - minus.size());
      for (std::size_t v = 0; v < n; ++v) {
        if (gains[v] >= 0.0) {
          ranked.emplace_back(gains[v], static_cast<std::uint32_t>(v));
        }
      }

      // price the candidate in the slot it would occupy: order-sensitive
      // estimators must see the exact solution that gets kept
      auto with_candidate = [&](std::uint32_t v) {
        std::vector<std::uint32_t> subset = xs;
        subset[idx] = v;
        return subset;
      };
      const double size_cost = alpha * static_cast<double>(minus.size() + 1);
      const LazyArgmaxResult pick = detail::lazy_argmax_impl(
          std::move(ranked),
          [&](std::uint32_t v) {
            const auto subset = with_candidate(v);
            return tour_lower_bound(subset_cost_matrix(subset, graph), closed) +
                   size_cost;
          },
          [&](std::uint32_t v) {
            return walk_cost(with_candidate(v), graph, problem.cost,
                             problem.policy);
          },
          budget,
          [&](std::uint32_t v) {
            if (problem.pose_admissible(v)) return true;
            rejected[v] = 1;
            return false;
          });
      result.exact_evaluations += pick.exact_evaluations;

      if (!pick.found) {
        // numerically possible only on a budget-tight boundary; keep x
        result.warnings.push_back(
            "gcb_plus: no feasible replacement found, keeping current pose");
        continue;
      }
      xs[idx] = pick.pose;
    }

    const double total = total_quality(q, xs);
    const double delta = total - previous_total;
    previous_total = total;
    if (delta <= kSweepTolerance) break;
  }

  result.poses = std::move(xs);
  result.objective = previous_total;
  return result;
}

// Plain greedy baseline: highest marginal gain first, travel costs ignored
// during selection; stops when the connected tour first exceeds the budget
// and drops that pose. Same tie-breaking and lazy reachability as gcb.
inline PlanResult greedy_baseline(const Problem& problem) {
  problem.validate();
  const QualityMatrix& q = *problem.quality;
  const PoseGraph& graph = *problem.graph;
  const std::size_t n = graph.pose_count();
  const double budget = problem.cost.budget;
  const double alpha = problem.cost.alpha;
  const bool closed = problem.cost.closed_tour;

  PlanResult result;
  ObjectiveState state(q.rows());
  std::vector<char> excluded(n, 0);
  std::vector<std::uint32_t> xs;
  std::vector<double> gains(n, 0.0);

  while (true) {
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t v = begin; v < end; ++v) {
        gains[v] = excluded[v]
                       ? -1.0
                       : state.marginal_gain(q, static_cast<std::uint32_t>(v));
      }
    });

    std::uint32_t chosen = 0;
    bool have_chosen = false;
    while (true) {
      double best_gain = 0.0;
      std::uint32_t best = 0;
      bool have = false;
      for (std::size_t v = 0; v < n; ++v) {
        if (gains[v] > best_gain) {  // strict: ties fall to the lowest id
          best_gain = gains[v];
          best = static_cast<std::uint32_t>(v);
          have = true;
        }
      }
      if (!have) break;  // no positive gain left
      if (!problem.pose_admissible(best)) {
        excluded[best] = 1;
        gains[best] = -1.0;
        continue;
      }
      chosen = best;
      have_chosen = true;
      break;
    }
    if (!have_chosen) break;

    xs.push_back(chosen);
    const double cost = walk_cost(xs, graph, problem.cost, problem.policy);
    if (cost > budget) {
      xs.pop_back();
      break;  // first violation stops the baseline
    }
    excluded[chosen] = 1;
    state.apply(q, chosen);

    TraceStep step;
    step.poses = xs;
    step.f = state.total();
    step.total = cost;
    step.travel = cost - alpha * static_cast<double>(xs.size());
    result.trace.steps.push_back(std::move(step));
  }

  if (xs.empty()) {
    result.warnings.push_back("greedy: no feasible nonempty solution");
  }
  result.poses = xs;
  result.objective = total_quality(q, xs);
  return result;
}

struct BruteForceResult {
  std::vector<std::uint32_t> poses;
  double objective = 0.0;
};

// Exhaustive subset enumeration with exact tour costs. Test oracle only;
// refuses instances past max_n.
inline BruteForceResult brute_force_optimum(const Problem& problem,
                                            std::size_t max_n = 12) {
  problem.validate();
  const QualityMatrix& q = *problem.quality;
  const PoseGraph& graph = *problem.graph;
  const std::size_t n = graph.pose_count();
  if (n > max_n) {
    throw std::invalid_argument("brute_force_optimum: too many poses (" +
                                std::to_string(n) + " > " +
                                std::to_string(max_n) + ")");
  }

  BruteForceResult best;  // the empty set is always feasible with value 0
  std::vector<std::uint32_t> subset;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    subset.clear();
    for (std::size_t v = 0; v < n; ++v) {
      if (mask & (std::size_t{1} << v)) subset.push_back(static_cast<std::uint32_t>(v));
    }
    if (problem.reachability) {
      bool ok = true;
      for (std::uint32_t v : subset) ok &= problem.pose_admissible(v);
      if (!ok) continue;
    }
    const double cost = walk_cost(subset, graph, problem.cost, TourPolicy::exact);
    if (cost > problem.cost.budget) continue;
    const double f = total_quality(q, subset);
    if (f > best.objective) {
      best.objective = f;
      best.poses = subset;
    }
  }
  return best;
}

}  // namespace sopp

#endif  // SOPP_PLANNER_HPP_

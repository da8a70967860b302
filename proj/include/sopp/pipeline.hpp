#ifndef SOPP_PIPELINE_HPP_
#define SOPP_PIPELINE_HPP_

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sopp/hull_grid.hpp"
#include "sopp/matrix_io.hpp"
#include "sopp/mesh_io.hpp"
#include "sopp/planner.hpp"

namespace sopp {

using ordered_json = nlohmann::ordered_json;

// All numbers in reports are serialized with 12 significant digits. Rounding
// happens before the value enters the JSON tree so dumps are reproducible.
inline double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // fold -0 into 0
}

inline std::string format12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

enum class ReachabilityKind { all, half_space, sphere_free };

// Geometric stand-ins for a robot workspace model. half_space keeps positions
// with coordinate >= offset along the chosen axis; sphere_free keeps
// positions at distance >= radius from the center.
struct ReachabilitySpec {
  ReachabilityKind kind = ReachabilityKind::all;
  int axis = 2;
  double offset = 0.0;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;

  ReachabilityPredicate predicate() const {
    ReachabilityPredicate p;
    if (kind == ReachabilityKind::half_space) {
      const int a = axis;
      const double o = offset;
      p.position_reachable = [a, o](const Vec3& v) { return v[a] >= o; };
      p.pose_reachable = [a, o](const Vec3& v, const Quat&) { return v[a] >= o; };
    } else if (kind == ReachabilityKind::sphere_free) {
      const Vec3 c = center;
      const double r = radius;
      p.position_reachable = [c, r](const Vec3& v) { return (v - c).norm() >= r; };
      p.pose_reachable = [c, r](const Vec3& v, const Quat&) {
        return (v - c).norm() >= r;
      };
    }
    return p;
  }
};

struct SweepSpec {
  std::string parameter;  // alpha | beta | budget
  std::vector<double> values;
};

struct RunConfig {
  std::filesystem::path mesh;
  std::size_t surface_samples = 500;
  std::uint64_t surface_seed = 1;
  std::size_t orientation_count = 16;
  std::uint64_t orientation_seed = 2;
  double grid_resolution = 0.05;
  double grid_dilation = 0.4;
  double frustum_angle_deg = 45.0;
  QualityFunction quality;
  double alpha = 0.05;
  double beta = 0.01;
  double budget = 10.0;
  bool closed_tour = true;
  std::vector<std::string> algorithms{"greedy", "greedy+", "gcb", "gcb+"};
  TourPolicy estimator = TourPolicy::automatic;
  ReachabilitySpec reachability;
  bool opt_full_cost_increments = false;
  std::optional<SweepSpec> sweep;
  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_dir;  // defaults to output_dir / "cache"

  std::filesystem::path effective_cache_dir() const {
    return cache_dir.empty() ? output_dir / "cache" : cache_dir;
  }

  void validate() const {
    if (mesh.empty()) throw ConfigError("config: mesh path is required");
    if (surface_samples < 1) throw ConfigError("config: surface_samples must be >= 1");
    if (orientation_count < 1) {
      throw ConfigError("config: orientation_count must be >= 1");
    }
    if (!(grid_resolution > 0.0)) {
      throw ConfigError("config: grid_resolution must be > 0");
    }
    if (!(grid_dilation >= 0.0)) throw ConfigError("config: grid_dilation must be >= 0");
    if (!(frustum_angle_deg > 0.0 && frustum_angle_deg < 180.0)) {
      throw ConfigError("config: frustum_angle_deg must lie in (0, 180)");
    }
    try {
      quality.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    if (!(alpha >= 0.0)) throw ConfigError("config: alpha must be >= 0");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("config: beta must lie in [0, 1]");
    if (!(budget > 0.0)) throw ConfigError("config: budget must be > 0");
    if (algorithms.empty()) throw ConfigError("config: algorithm list must not be empty");
    for (const std::string& a : algorithms) {
      if (a != "greedy" && a != "greedy+" && a != "gcb" && a != "gcb+") {
        throw ConfigError("config: unknown algorithm '" + a + "'");
      }
    }
    if (reachability.kind == ReachabilityKind::half_space &&
        (reachability.axis < 0 || reachability.axis > 2)) {
      throw ConfigError("config: reachability axis must be x, y or z");
    }
    if (reachability.kind == ReachabilityKind::sphere_free &&
        !(reachability.radius >= 0.0)) {
      throw ConfigError("config: reachability radius must be >= 0");
    }
    if (sweep) {
      if (sweep->parameter != "alpha" && sweep->parameter != "beta" &&
          sweep->parameter != "budget") {
        throw ConfigError("config: sweep parameter must be alpha, beta or budget");
      }
      if (sweep->values.empty()) {
        throw ConfigError("config: sweep value list must not be empty");
      }
      for (double v : sweep->values) {
        if (sweep->parameter == "alpha" && !(v >= 0.0)) {
          throw ConfigError("config: swept alpha values must be >= 0");
        }
        if (sweep->parameter == "beta" && !(v >= 0.0 && v <= 1.0)) {
          throw ConfigError("config: swept beta values must lie in [0, 1]");
        }
        if (sweep->parameter == "budget" && !(v > 0.0)) {
          throw ConfigError("config: swept budget values must be > 0");
        }
      }
    }
    if (output_dir.empty()) throw ConfigError("config: output_dir must not be empty");
  }
};

namespace detail {

inline const ordered_json* find_key(const ordered_json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <typename T>
T get_or(const ordered_json& j, const char* key, T fallback) {
  const ordered_json* v = find_key(j, key);
  if (!v) return fallback;
  try {
    return v->get<T>();
  } catch (const std::exception&) {
    throw ConfigError(std::string("config: invalid value for '") + key + "'");
  }
}

inline void reject_unknown_keys(const ordered_json& j,
                                std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok |= item.key() == k;
    if (!ok) {
      throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
    }
  }
}

}  // namespace detail

inline RunConfig parse_config(const ordered_json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  detail::reject_unknown_keys(
      j,
      {"mesh", "surface_samples", "surface_seed", "orientation_count",
       "orientation_seed", "grid_resolution", "grid_dilation",
       "frustum_angle_deg", "quality", "alpha", "beta", "budget", "closed_tour",
       "algorithms", "estimator", "reachability", "opt_increments", "sweep",
       "output_dir", "cache_dir"},
      "top level");

  RunConfig cfg;
  cfg.mesh = detail::get_or<std::string>(j, "mesh", "");
  cfg.surface_samples = detail::get_or<std::size_t>(j, "surface_samples", 500);
  cfg.surface_seed = detail::get_or<std::uint64_t>(j, "surface_seed", 1);
  cfg.orientation_count = detail::get_or<std::size_t>(j, "orientation_count", 16);
  cfg.orientation_seed = detail::get_or<std::uint64_t>(j, "orientation_seed", 2);
  cfg.grid_resolution = detail::get_or<double>(j, "grid_resolution", 0.05);
  cfg.grid_dilation = detail::get_or<double>(j, "grid_dilation", 0.4);
  cfg.frustum_angle_deg = detail::get_or<double>(j, "frustum_angle_deg", 45.0);

  if (const ordered_json* q = detail::find_key(j, "quality")) {
    detail::reject_unknown_keys(*q, {"kind", "max_angle_deg", "min_distance"},
                                "quality");
    const std::string kind = detail::get_or<std::string>(*q, "kind", "coverage");
    if (kind == "coverage") {
      cfg.quality.kind = QualityKind::coverage;
    } else if (kind == "projected_area") {
      cfg.quality.kind = QualityKind::projected_area;
    } else {
      throw ConfigError("config: unknown quality kind '" + kind + "'");
    }
    cfg.quality.max_angle_deg = detail::get_or<double>(*q, "max_angle_deg", 30.0);
    cfg.quality.min_distance = detail::get_or<double>(*q, "min_distance", 0.1);
  }

  cfg.alpha = detail::get_or<double>(j, "alpha", 0.05);
  cfg.beta = detail::get_or<double>(j, "beta", 0.01);
  cfg.budget = detail::get_or<double>(j, "budget", 10.0);
  cfg.closed_tour = detail::get_or<bool>(j, "closed_tour", true);
  if (const ordered_json* a = detail::find_key(j, "algorithms")) {
    cfg.algorithms = a->get<std::vector<std::string>>();
  }
  const std::string est = detail::get_or<std::string>(j, "estimator", "auto");
  if (est == "nn") {
    cfg.estimator = TourPolicy::nearest_neighbor;
  } else if (est == "exact") {
    cfg.estimator = TourPolicy::exact;
  } else if (est == "auto") {
    cfg.estimator = TourPolicy::automatic;
  } else {
    throw ConfigError("config: estimator must be nn, exact or auto");
  }

  if (const ordered_json* r = detail::find_key(j, "reachability")) {
    detail::reject_unknown_keys(*r, {"kind", "axis", "offset", "center", "radius"},
                                "reachability");
    const std::string kind = detail::get_or<std::string>(*r, "kind", "all");
    if (kind == "all") {
      cfg.reachability.kind = ReachabilityKind::all;
    } else if (kind == "half_space") {
      cfg.reachability.kind = ReachabilityKind::half_space;
      const std::string axis = detail::get_or<std::string>(*r, "axis", "z");
      if (axis == "x") {
        cfg.reachability.axis = 0;
      } else if (axis == "y") {
        cfg.reachability.axis = 1;
      } else if (axis == "z") {
        cfg.reachability.axis = 2;
      } else {
        throw ConfigError("config: reachability axis must be x, y or z");
      }
      cfg.reachability.offset = detail::get_or<double>(*r, "offset", 0.0);
    } else if (kind == "sphere_free") {
      cfg.reachability.kind = ReachabilityKind::sphere_free;
      if (const ordered_json* c = detail::find_key(*r, "center")) {
        const auto v = c->get<std::vector<double>>();
        if (v.size() != 3) {
          throw ConfigError("config: reachability center must have 3 components");
        }
        cfg.reachability.center = Vec3(v[0], v[1], v[2]);
      }
      cfg.reachability.radius = detail::get_or<double>(*r, "radius", 0.0);
    } else {
      throw ConfigError("config: unknown reachability kind '" + kind + "'");
    }
  }

  const std::string inc = detail::get_or<std::string>(j, "opt_increments", "travel");
  if (inc == "travel") {
    cfg.opt_full_cost_increments = false;
  } else if (inc == "full_cost") {
    cfg.opt_full_cost_increments = true;
  } else {
    throw ConfigError("config: opt_increments must be travel or full_cost");
  }

  if (const ordered_json* s = detail::find_key(j, "sweep")) {
    if (!s->is_null()) {
      detail::reject_unknown_keys(*s, {"parameter", "values"}, "sweep");
      SweepSpec spec;
      spec.parameter = detail::get_or<std::string>(*s, "parameter", "");
      if (const ordered_json* v = detail::find_key(*s, "values")) {
        spec.values = v->get<std::vector<double>>();
      }
      cfg.sweep = std::move(spec);
    }
  }

  cfg.output_dir = detail::get_or<std::string>(j, "output_dir", "out");
  cfg.cache_dir = detail::get_or<std::string>(j, "cache_dir", "");
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

// Full resolved-config echo; re-running from this JSON reproduces the run.
inline ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["mesh"] = cfg.mesh.string();
  j["surface_samples"] = cfg.surface_samples;
  j["surface_seed"] = cfg.surface_seed;
  j["orientation_count"] = cfg.orientation_count;
  j["orientation_seed"] = cfg.orientation_seed;
  j["grid_resolution"] = round12(cfg.grid_resolution);
  j["grid_dilation"] = round12(cfg.grid_dilation);
  j["frustum_angle_deg"] = round12(cfg.frustum_angle_deg);
  ordered_json q;
  q["kind"] = cfg.quality.kind == QualityKind::coverage ? "coverage" : "projected_area";
  q["max_angle_deg"] = round12(cfg.quality.max_angle_deg);
  q["min_distance"] = round12(cfg.quality.min_distance);
  j["quality"] = std::move(q);
  j["alpha"] = round12(cfg.alpha);
  j["beta"] = round12(cfg.beta);
  j["budget"] = round12(cfg.budget);
  j["closed_tour"] = cfg.closed_tour;
  j["algorithms"] = cfg.algorithms;
  j["estimator"] = cfg.estimator == TourPolicy::nearest_neighbor ? "nn"
                   : cfg.estimator == TourPolicy::exact          ? "exact"
                                                                 : "auto";
  ordered_json r;
  if (cfg.reachability.kind == ReachabilityKind::all) {
    r["kind"] = "all";
  } else if (cfg.reachability.kind == ReachabilityKind::half_space) {
    r["kind"] = "half_space";
    r["axis"] = cfg.reachability.axis == 0 ? "x" : cfg.reachability.axis == 1 ? "y" : "z";
    r["offset"] = round12(cfg.reachability.offset);
  } else {
    r["kind"] = "sphere_free";
    r["center"] = {round12(cfg.reachability.center.x()),
                   round12(cfg.reachability.center.y()),
                   round12(cfg.reachability.center.z())};
    r["radius"] = round12(cfg.reachability.radius);
  }
  j["reachability"] = std::move(r);
  j["opt_increments"] = cfg.opt_full_cost_increments ? "full_cost" : "travel";
  if (cfg.sweep) {
    ordered_json s;
    s["parameter"] = cfg.sweep->parameter;
    ordered_json values = ordered_json::array();
    for (double v : cfg.sweep->values) values.push_back(round12(v));
    s["values"] = std::move(values);
    j["sweep"] = std::move(s);
  } else {
    j["sweep"] = nullptr;
  }
  j["output_dir"] = cfg.output_dir.string();
  j["cache_dir"] = cfg.cache_dir.string();
  return j;
}

struct PoseRecord {
  std::uint32_t id = 0;
  ViewPose view;
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
};

struct AlgorithmReport {
  std::string name;
  std::vector<PoseRecord> poses;
  std::vector<std::uint32_t> tour;  // pose ids in visit order
  double objective = 0.0;
  double travel_cost = 0.0;
  double total_cost = 0.0;
  double ratio = 0.0;
  double runtime_seconds = 0.0;  // kept out of the deterministic JSON report
  std::vector<std::string> warnings;
};

struct ProblemSizes {
  std::size_t model_points = 0;
  std::size_t grid_positions = 0;
  std::size_t orientations = 0;
  std::size_t poses = 0;
  std::size_t quality_nonzeros = 0;
  std::size_t removed_unreachable = 0;
  std::size_t removed_disconnected = 0;
};

struct PlanReport {
  ordered_json config_echo;
  bool has_sweep = false;
  std::string sweep_parameter;
  double sweep_value = 0.0;
  ProblemSizes sizes;
  double opt = 0.0;
  double opt_full_cost_increments = 0.0;
  std::vector<std::string> opt_warnings;
  std::vector<AlgorithmReport> algorithms;
};

struct SweepRow {
  std::string algorithm;
  std::string parameter;  // empty when the run has no sweep
  double value = 0.0;
  bool has_value = false;
  double objective = 0.0;
  double total_cost = 0.0;
  double opt = 0.0;
  double ratio_percent = 0.0;
  double runtime_seconds = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

struct PipelineResult {
  std::vector<PlanReport> reports;  // one per sweep value
  SweepTable table;
};

namespace detail {

inline std::uint64_t file_content_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Fnv1a h;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.digest();
}

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

template <typename Fn>
double timed_seconds(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

}  // namespace detail

// Everything that is independent of the cost parameters and therefore shared
// across sweep values: mesh, samples, pose graph and quality matrix.
struct PipelineArtifacts {
  TriangleMesh mesh;
  std::vector<ModelPoint> points;
  PoseGraph graph;
  QualityMatrix quality;
  ProblemSizes sizes;
};

inline PipelineArtifacts build_artifacts(const RunConfig& cfg) {
  PipelineArtifacts art;

  std::uint64_t mesh_hash = 0;
  try {
    mesh_hash = detail::file_content_hash(cfg.mesh);
    art.mesh = load_mesh(cfg.mesh);
  } catch (const std::exception& e) {
    throw PipelineError("mesh", e.what());
  }

  std::vector<Vec3> candidates;
  try {
    art.points = sample_surface(art.mesh, cfg.surface_samples, cfg.surface_seed);
    candidates = inflated_hull_grid(art.mesh, cfg.grid_dilation, cfg.grid_resolution);
  } catch (const std::exception& e) {
    throw PipelineError("geometry", e.what());
  }

  const std::filesystem::path cache = cfg.effective_cache_dir();
  std::filesystem::create_directories(cache);

  Fnv1a dt_key;
  dt_key.update_string("sopp-cache-1:travel");
  dt_key.update_value(mesh_hash);
  dt_key.update_value(cfg.grid_resolution);
  dt_key.update_value(cfg.grid_dilation);
  dt_key.update_value(static_cast<int>(cfg.reachability.kind));
  dt_key.update_value(cfg.reachability.axis);
  dt_key.update_value(cfg.reachability.offset);
  dt_key.update_value(cfg.reachability.center.x());
  dt_key.update_value(cfg.reachability.center.y());
  dt_key.update_value(cfg.reachability.center.z());
  dt_key.update_value(cfg.reachability.radius);

  try {
    const ReachabilityPredicate reach = cfg.reachability.predicate();
    const FiberGraph full = build_fiber_graph(candidates, cfg.grid_resolution);
    const FilterResult filtered = filter_unreachable(candidates, full, reach);
    art.sizes.removed_unreachable = filtered.removed_unreachable;
    art.sizes.removed_disconnected = filtered.removed_disconnected;

    art.graph.positions.reserve(filtered.retained.size());
    for (std::uint32_t idx : filtered.retained) {
      art.graph.positions.push_back(candidates[idx]);
    }
    art.graph.orientations =
        sample_orientations(cfg.orientation_count, cfg.orientation_seed);
    art.graph.fiber = build_fiber_graph(art.graph.positions, cfg.grid_resolution);
    art.graph.beta = cfg.beta;

    const std::filesystem::path dt_path =
        cache / ("dt_" + detail::hex16(dt_key.digest()) + ".bin");
    bool dt_loaded = false;
    if (std::filesystem::exists(dt_path)) {
      DenseMatrix cached = load_distance_matrix(dt_path);
      if (cached.rows() == art.graph.positions.size()) {
        art.graph.travel = std::move(cached);
        dt_loaded = true;
      }
    }
    if (!dt_loaded) {
      art.graph.travel = all_pairs_shortest(art.graph.fiber, art.graph.positions);
      save_distance_matrix(art.graph.travel, dt_path);
    }

    Fnv1a do_key;
    do_key.update_string("sopp-cache-1:angular");
    do_key.update_value(cfg.orientation_count);
    do_key.update_value(cfg.orientation_seed);
    const std::filesystem::path do_path =
        cache / ("do_" + detail::hex16(do_key.digest()) + ".bin");
    bool do_loaded = false;
    if (std::filesystem::exists(do_path)) {
      DenseMatrix cached = load_distance_matrix(do_path);
      if (cached.rows() == art.graph.orientations.size()) {
        art.graph.angular = std::move(cached);
        do_loaded = true;
      }
    }
    if (!do_loaded) {
      art.graph.angular = orientation_metric(art.graph.orientations);
      save_distance_matrix(art.graph.angular, do_path);
    }
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("discretization", e.what());
  }

  try {
    Fnv1a qm_key;
    qm_key.update_string("sopp-cache-1:quality");
    qm_key.update_value(dt_key.digest());
    qm_key.update_value(cfg.surface_samples);
    qm_key.update_value(cfg.surface_seed);
    qm_key.update_value(cfg.orientation_count);
    qm_key.update_value(cfg.orientation_seed);
    qm_key.update_value(cfg.frustum_angle_deg);
    qm_key.update_value(static_cast<int>(cfg.quality.kind));
    qm_key.update_value(cfg.quality.max_angle_deg);
    qm_key.update_value(cfg.quality.min_distance);
    const std::filesystem::path qm_path =
        cache / ("qm_" + detail::hex16(qm_key.digest()) + ".bin");

    bool loaded = false;
    if (std::filesystem::exists(qm_path)) {
      LoadedQualityMatrix cached = load_quality_matrix(qm_path);
      if (cached.matrix.rows() == art.points.size() &&
          cached.matrix.cols() == art.graph.pose_count()) {
        art.quality = std::move(cached.matrix);
        loaded = true;
      }
    }
    if (!loaded) {
      const Frustum frustum{cfg.frustum_angle_deg};
      art.quality = build_quality_matrix(art.points, art.graph, art.mesh, frustum,
                                         cfg.quality);
      save_quality_matrix(art.quality, cfg.quality, qm_path);
    }
    if (art.quality.nonzeros() == 0) {
      throw std::runtime_error(
          "all-zero quality matrix: no pose observes any model point");
    }
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError("quality", e.what());
  }

  art.sizes.model_points = art.points.size();
  art.sizes.grid_positions = art.graph.position_count();
  art.sizes.orientations = art.graph.orientation_count();
  art.sizes.poses = art.graph.pose_count();
  art.sizes.quality_nonzeros = art.quality.nonzeros();
  return art;
}

namespace detail {

inline AlgorithmReport make_algorithm_report(
    const std::string& name, const std::vector<std::uint32_t>& poses,
    double objective, const std::vector<std::string>& warnings, double opt,
    const PoseGraph& graph, const CostModel& model, TourPolicy policy,
    double runtime_seconds) {
  AlgorithmReport rep;
  rep.name = name;
  rep.objective = objective;
  rep.runtime_seconds = runtime_seconds;
  rep.warnings = warnings;
  for (std::uint32_t v : poses) {
    PoseRecord rec;
    rec.id = v;
    rec.view = graph.pose(v);
    rec.position = graph.positions[rec.view.position_index];
    rec.orientation = graph.orientations[rec.view.orientation_index];
    rep.poses.push_back(rec);
  }
  const TourEstimate tour = planned_tour(poses, graph, policy, model.closed_tour);
  rep.tour = tour.order;
  rep.travel_cost = tour.travel;
  rep.total_cost = tour.travel + model.alpha * static_cast<double>(poses.size());
  if (opt > 0.0 && std::isfinite(opt)) {
    double r = objective / opt;
    if (r > 1.0 + 1e-9) {
      rep.warnings.push_back("ratio exceeded 1, clamped; reference bound is tight");
    }
    rep.ratio = std::min(1.0, std::max(0.0, r));
  }
  return rep;
}

}  // namespace detail

// Runs the full pipeline: geometry, discretization, quality, then every
// requested algorithm for every sweep value. The expensive precomputations
// are shared across sweep values; the reference bound always comes from an
// internal GCB trace, whether or not gcb itself is in the algorithm list.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  PipelineArtifacts art = build_artifacts(cfg);
  const ReachabilityPredicate reach = cfg.reachability.predicate();

  struct SweepPoint {
    bool has_value = false;
    double value = 0.0;
  };
  std::vector<SweepPoint> points;
  if (cfg.sweep) {
    for (double v : cfg.sweep->values) points.push_back({true, v});
  } else {
    points.push_back({false, 0.0});
  }

  PipelineResult result;
  for (const SweepPoint& sp : points) {
    double alpha = cfg.alpha, beta = cfg.beta, budget = cfg.budget;
    if (sp.has_value) {
      if (cfg.sweep->parameter == "alpha") alpha = sp.value;
      if (cfg.sweep->parameter == "beta") beta = sp.value;
      if (cfg.sweep->parameter == "budget") budget = sp.value;
    }
    art.graph.beta = beta;

    CostModel model;
    model.alpha = alpha;
    model.beta = beta;
    model.budget = budget;
    model.closed_tour = cfg.closed_tour;

    Problem problem;
    problem.quality = &art.quality;
    problem.graph = &art.graph;
    problem.cost = model;
    problem.reachability = &reach;
    problem.policy = cfg.estimator;
    problem.opt_full_cost_increments = cfg.opt_full_cost_increments;

    PlanReport report;
    report.config_echo = config_to_json(cfg);
    report.has_sweep = sp.has_value;
    if (sp.has_value) {
      report.sweep_parameter = cfg.sweep->parameter;
      report.sweep_value = sp.value;
    }
    report.sizes = art.sizes;

    try {
      const bool want_greedy =
          std::count(cfg.algorithms.begin(), cfg.algorithms.end(), "greedy") > 0;
      const bool want_greedy_plus =
          std::count(cfg.algorithms.begin(), cfg.algorithms.end(), "greedy+") > 0;
      const bool want_gcb_plus =
          std::count(cfg.algorithms.begin(), cfg.algorithms.end(), "gcb+") > 0;

      // gcb always runs: its trace defines the reference bound
      PlanResult gcb_result;
      const double gcb_seconds =
          detail::timed_seconds([&] { gcb_result = gcb(problem); });

      const OptBound opt = opt_bound(gcb_result.trace, budget, false);
      const OptBound opt_full = opt_bound(gcb_result.trace, budget, true);
      report.opt = opt.value;
      report.opt_full_cost_increments = opt_full.value;
      report.opt_warnings = opt.warnings;

      PlanResult greedy_result;
      double greedy_seconds = 0.0;
      if (want_greedy || want_greedy_plus) {
        greedy_seconds =
            detail::timed_seconds([&] { greedy_result = greedy_baseline(problem); });
      }

      for (const std::string& name : cfg.algorithms) {
        if (name == "gcb") {
          report.algorithms.push_back(detail::make_algorithm_report(
              name, gcb_result.poses, gcb_result.objective, gcb_result.warnings,
              opt.value, art.graph, model, cfg.estimator, gcb_seconds));
        } else if (name == "greedy") {
          report.algorithms.push_back(detail::make_algorithm_report(
              name, greedy_result.poses, greedy_result.objective,
              greedy_result.warnings, opt.value, art.graph, model, cfg.estimator,
              greedy_seconds));
        } else if (name == "gcb+" && want_gcb_plus) {
          GcbPlusResult plus;
          const double seconds = detail::timed_seconds(
              [&] { plus = gcb_plus(gcb_result.poses, problem); });
          report.algorithms.push_back(detail::make_algorithm_report(
              name, plus.poses, plus.objective, plus.warnings, opt.value,
              art.graph, model, cfg.estimator, seconds));
        } else if (name == "greedy+") {
          GcbPlusResult plus;
          const double seconds = detail::timed_seconds(
              [&] { plus = gcb_plus(greedy_result.poses, problem); });
          report.algorithms.push_back(detail::make_algorithm_report(
              name, plus.poses, plus.objective, plus.warnings, opt.value,
              art.graph, model, cfg.estimator, seconds));
        }
      }
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError("planner", e.what());
    }

    for (const AlgorithmReport& a : report.algorithms) {
      SweepRow row;
      row.algorithm = a.name;
      row.parameter = report.sweep_parameter;
      row.value = report.sweep_value;
      row.has_value = report.has_sweep;
      row.objective = a.objective;
      row.total_cost = a.total_cost;
      row.opt = report.opt;
      row.ratio_percent = 100.0 * a.ratio;
      row.runtime_seconds = a.runtime_seconds;
      result.table.rows.push_back(row);
    }
    result.reports.push_back(std::move(report));
  }
  return result;
}

inline ordered_json algorithm_report_to_json(const PlanReport& report,
                                             const AlgorithmReport& algo) {
  ordered_json j;
  j["config"] = report.config_echo;
  if (report.has_sweep) {
    ordered_json s;
    s["parameter"] = report.sweep_parameter;
    s["value"] = round12(report.sweep_value);
    j["sweep"] = std::move(s);
  } else {
    j["sweep"] = nullptr;
  }
  ordered_json sizes;
  sizes["model_points"] = report.sizes.model_points;
  sizes["grid_positions"] = report.sizes.grid_positions;
  sizes["orientations"] = report.sizes.orientations;
  sizes["poses"] = report.sizes.poses;
  sizes["quality_nonzeros"] = report.sizes.quality_nonzeros;
  sizes["removed_unreachable"] = report.sizes.removed_unreachable;
  sizes["removed_disconnected"] = report.sizes.removed_disconnected;
  j["problem"] = std::move(sizes);
  j["opt"] = round12(report.opt);
  j["opt_full_cost_increments"] = round12(report.opt_full_cost_increments);
  j["opt_warnings"] = report.opt_warnings;

  ordered_json a;
  a["name"] = algo.name;
  a["objective"] = round12(algo.objective);
  a["travel_cost"] = round12(algo.travel_cost);
  a["total_cost"] = round12(algo.total_cost);
  a["ratio"] = round12(algo.ratio);
  a["pose_count"] = algo.poses.size();
  ordered_json poses = ordered_json::array();
  for (const PoseRecord& rec : algo.poses) {
    ordered_json p;
    p["id"] = rec.id;
    p["position_index"] = rec.view.position_index;
    p["orientation_index"] = rec.view.orientation_index;
    p["position"] = {round12(rec.position.x()), round12(rec.position.y()),
                     round12(rec.position.z())};
    p["quaternion_wxyz"] = {round12(rec.orientation.w()), round12(rec.orientation.x()),
                            round12(rec.orientation.y()), round12(rec.orientation.z())};
    poses.push_back(std::move(p));
  }
  a["poses"] = std::move(poses);
  // the tour is what an external executor would validate against the
  // zero-extra-cost assumption; it is reported, not enforced
  a["tour"] = algo.tour;
  a["warnings"] = algo.warnings;
  j["algorithm"] = std::move(a);
  return j;
}

inline std::string report_file_name(const PlanReport& report,
                                    const AlgorithmReport& algo) {
  std::string name = "report_";
  if (report.has_sweep) {
    name += report.sweep_parameter + "_" + format12(report.sweep_value) + "_";
  }
  name += algo.name;
  name += ".json";
  return name;
}

// Writes one JSON file per (algorithm, sweep value); returns the paths.
inline std::vector<std::filesystem::path> emit_report(
    const PlanReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const AlgorithmReport& algo : report.algorithms) {
    const std::filesystem::path path = dir / report_file_name(report, algo);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PipelineError("report", "cannot write " + path.string());
    out << algorithm_report_to_json(report, algo).dump(2) << '\n';
    if (!out) throw PipelineError("report", "failed writing " + path.string());
    written.push_back(path);
  }
  return written;
}

// Sweep table CSV: one row per (algorithm, sweep value). Runtime lives here
// rather than in the JSON reports, which stay byte-reproducible.
inline void emit_sweep_table(const SweepTable& table,
                             const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("report", "cannot write " + path.string());
  out << "algorithm,sweep_parameter,sweep_value,objective,total_cost,opt,"
         "ratio_percent,runtime_seconds\n";
  for (const SweepRow& row : table.rows) {
    out << row.algorithm << ',' << row.parameter << ',';
    if (row.has_value) out << format12(row.value);
    out << ',' << format12(round12(row.objective)) << ','
        << format12(round12(row.total_cost)) << ',' << format12(round12(row.opt))
        << ',' << format12(round12(row.ratio_percent)) << ',';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", row.runtime_seconds);
    out << buf << '\n';
  }
  if (!out) throw PipelineError("report", "failed writing " + path.string());
}

}  // namespace sopp

#endif  // SOPP_PIPELINE_HPP_

// Inspection planning CLI: reads a JSON config, runs the discretization and
// planning pipeline, writes per-algorithm JSON reports plus a sweep CSV.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sopp/pipeline.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text) {
    if (c == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

sopp::SweepSpec parse_sweep_flag(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw sopp::ConfigError("config: --sweep expects parameter=v1,v2,...");
  }
  sopp::SweepSpec spec;
  spec.parameter = text.substr(0, eq);
  for (const std::string& v : split_list(text.substr(eq + 1))) {
    try {
      std::size_t used = 0;
      const double value = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      spec.values.push_back(value);
    } catch (const std::exception&) {
      throw sopp::ConfigError("config: bad sweep value '" + v + "'");
    }
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"view planning over sampled inspection poses"};
  std::string config_path;
  std::string algorithms_flag;
  std::string sweep_flag;
  std::string out_flag;
  std::string estimator_flag;
  std::uint64_t seed_surface = 0;
  std::uint64_t seed_orient = 0;
  bool have_seed_surface = false;
  bool have_seed_orient = false;

  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--algorithms", algorithms_flag,
                 "comma list: greedy,greedy+,gcb,gcb+");
  app.add_option("--sweep", sweep_flag, "parameter=v1,v2,... (alpha|beta|budget)");
  app.add_option("--out", out_flag, "output directory override");
  app.add_option("--estimator", estimator_flag, "tour cost estimator: nn|exact|auto");
  app.add_option("--seed-surface", seed_surface, "surface sampling seed override")
      ->each([&](const std::string&) { have_seed_surface = true; });
  app.add_option("--seed-orient", seed_orient, "orientation sampling seed override")
      ->each([&](const std::string&) { have_seed_orient = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    sopp::RunConfig cfg = sopp::load_run_config(config_path);
    if (!algorithms_flag.empty()) cfg.algorithms = split_list(algorithms_flag);
    if (!sweep_flag.empty()) cfg.sweep = parse_sweep_flag(sweep_flag);
    if (!out_flag.empty()) cfg.output_dir = out_flag;
    if (!estimator_flag.empty()) {
      if (estimator_flag == "nn") {
        cfg.estimator = sopp::TourPolicy::nearest_neighbor;
      } else if (estimator_flag == "exact") {
        cfg.estimator = sopp::TourPolicy::exact;
      } else if (estimator_flag == "auto") {
        cfg.estimator = sopp::TourPolicy::automatic;
      } else {
        throw sopp::ConfigError("config: estimator must be nn, exact or auto");
      }
    }
    if (have_seed_surface) cfg.surface_seed = seed_surface;
    if (have_seed_orient) cfg.orientation_seed = seed_orient;
    cfg.validate();

    const sopp::PipelineResult result = sopp::run_pipeline(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    for (const sopp::PlanReport& report : result.reports) {
      for (const auto& path : sopp::emit_report(report, cfg.output_dir)) {
        std::printf("wrote %s\n", path.string().c_str());
      }
    }
    const std::filesystem::path csv = cfg.output_dir / "sweep.csv";
    sopp::emit_sweep_table(result.table, csv);
    std::printf("wrote %s\n", csv.string().c_str());

    for (const sopp::PlanReport& report : result.reports) {
      for (const auto& algo : report.algorithms) {
        std::printf("%-8s", algo.name.c_str());
        if (report.has_sweep) {
          std::printf(" %s=%s", report.sweep_parameter.c_str(),
                      sopp::format12(report.sweep_value).c_str());
        }
        std::printf("  f=%s  C=%s  ratio=%.1f%%  poses=%zu\n",
                    sopp::format12(sopp::round12(algo.objective)).c_str(),
                    sopp::format12(sopp::round12(algo.total_cost)).c_str(),
                    100.0 * algo.ratio, algo.poses.size());
      }
    }
    return 0;
  } catch (const sopp::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const sopp::PipelineError& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.stage.c_str(), e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error [internal]: %s\n", e.what());
    return 3;
  }
}

#include "obsdet/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "obsdet/detector.hpp"
#include "obsdet/geo_io.hpp"
#include "obsdet/kernels.hpp"
#include "obsdet/knn_index.hpp"

namespace obsdet::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Errors that map to the usage exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IndexArgs {
  std::string input;
  std::string output;
  std::size_t window = 6;
  std::size_t step = 1;
  std::size_t k = 8;
  std::size_t max_degree = 16;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 64;
  std::size_t ef_distinct = 16;
  std::uint64_t seed = 42;
  double interval_s = 10.0;
  double max_gap_s = 0.0;
  std::optional<double> origin_lat;
  std::optional<double> origin_lon;
  bool exact_knn = false;
};

struct DetectArgs {
  std::string index;
  std::string query;
  std::string output;
  double tau = 1.645;
  double delta = 1.0;
  double sigma = 1.0;
  double epsilon = 0.0;
  std::size_t k = 8;
  std::string z_mode = "pooled";
  std::string density_mode = "kernel_sum";
  bool no_optimizations = false;
  bool exact_knn = false;
  double interval_s = 10.0;
  double max_gap_s = 0.0;
};

struct EvalArgs {
  std::string detections;
  std::string truth;
  std::optional<double> enlarge_m;
  double max_angle_deg = 90.0;
};

struct SynthArgs {
  std::string output_dir;
  ScenarioParams params;
};

struct SweepArgs {
  DetectArgs detect;
  std::string truth;
  std::vector<double> deltas{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  std::vector<double> taus{1.645};
  std::optional<double> enlarge_m;
};

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("no such file: '" + path + "'");
}

std::vector<Trajectory> read_trajectories(const std::string& path, const Projection& projection,
                                          double interval_s, double max_gap_s, std::ostream& err) {
  require_file(path);
  const auto tracks = load_tracks(path);
  InterpolationParams ip;
  ip.interval_s = interval_s;
  ip.max_gap_s = max_gap_s;
  InterpolationResult r = interpolate_all(tracks, projection, ip);
  if (r.skipped_segments > 0) {
    err << "warning: skipped " << r.skipped_segments << " track piece(s) with fewer than 2 points\n";
  }
  return std::move(r.trajectories);
}

DetectParams detect_params(const DetectArgs& a) {
  DetectParams p;
  p.tau = a.tau;
  p.delta = a.delta;
  p.k = a.k;
  p.epsilon = a.epsilon;
  p.z_mode = a.z_mode == "paper" ? ZMode::paper : ZMode::pooled;
  p.density.sigma = a.sigma;
  p.density.normalization = a.density_mode == "paper_literal"
                                ? DensityNormalization::paper_literal
                                : DensityNormalization::kernel_sum;
  p.optimizations = a.no_optimizations ? Optimizations::all_off() : Optimizations::all_on();
  p.search = a.exact_knn ? SearchMode::exact : SearchMode::graph;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return p;
}

int cmd_index(const IndexArgs& a, std::ostream& out, std::ostream& err) {
  PartitionParams pp{a.window, a.step};
  IndexParams ip{a.k, a.max_degree, a.ef_construction, a.ef_search, a.seed, a.ef_distinct};
  try {
    pp.validate();
    ip.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  require_file(a.input);
  const auto tracks = load_tracks(a.input);
  ProjectionOrigin origin = bounding_box_center(tracks);
  if (a.origin_lat) origin.lat = *a.origin_lat;
  if (a.origin_lon) origin.lon = *a.origin_lon;
  const Projection projection(origin);
  InterpolationParams interp{a.interval_s, a.max_gap_s};
  InterpolationResult r = interpolate_all(tracks, projection, interp);
  if (r.skipped_segments > 0) {
    err << "warning: skipped " << r.skipped_segments << " track piece(s) with fewer than 2 points\n";
  }

  out << "window=" << pp.window << " step=" << pp.step << " k=" << ip.k << "\n";
  const auto start = Clock::now();
  CorpusIndex index;
  try {
    index = CorpusIndex::build(std::move(r.trajectories), pp, ip, CorpusKind::reference, true,
                               a.exact_knn ? SearchMode::exact : SearchMode::graph);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const double build_s = seconds_since(start);
  index.set_origin(origin);
  index.save_file(a.output);
  out << "trajectories=" << index.trajectory_count() << "\n";
  out << "windows=" << index.corpus().window_count() << "\n";
  out << "indexed=" << index.indexed_count() << "\n";
  err << "build_time_s=" << std::fixed << std::setprecision(3) << build_s << "\n";
  return kExitOk;
}

struct PreparedDetection {
  CorpusIndex reference;
  CorpusIndex query;
  Projection projection{ProjectionOrigin{}};
  DetectParams params;
};

PreparedDetection prepare_detection(const DetectArgs& a, std::ostream& err) {
  PreparedDetection prep;
  prep.params = detect_params(a);
  require_file(a.index);
  try {
    prep.reference = CorpusIndex::load_file(a.index);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
  if (prep.reference.kind() != CorpusKind::reference) {
    throw UsageError("'" + a.index + "' is not a reference index");
  }
  prep.projection = Projection(prep.reference.origin().value_or(ProjectionOrigin{}));
  auto trajectories =
      read_trajectories(a.query, prep.projection, a.interval_s, a.max_gap_s, err);
  const auto start = Clock::now();
  try {
    prep.query = CorpusIndex::build(std::move(trajectories), prep.reference.corpus().params(),
                                    prep.reference.params(), CorpusKind::query, false);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("query corpus: ") + e.what());
  }
  if (prep.params.search == SearchMode::exact && prep.params.optimizations.precomputed_reference &&
      prep.reference.distinct_table().mode != SearchMode::exact) {
    prep.reference.precompute_distinct(SearchMode::exact);
  }
  err << "query_index_time_s=" << std::fixed << std::setprecision(3) << seconds_since(start)
      << "\n";
  return prep;
}

int cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
  PreparedDetection prep = prepare_detection(a, err);
  const auto start = Clock::now();
  const DetectionResult result = detect(prep.reference, prep.query, prep.params);
  const double query_s = seconds_since(start);
  if (!a.output.empty()) export_geojson(result, prep.projection, a.output);

  out << "query_windows=" << prep.query.corpus().window_count() << "\n";
  out << "obstacles=" << result.obstacles.size() << "\n";
  out << "candidates=" << result.candidate_union().size() << "\n";
  out << "queries_checked=" << result.stats.queries_checked << "\n";
  out << "candidates_tested=" << result.stats.candidates_tested << "\n";
  out << "skips_taken=" << result.stats.skips_taken << "\n";
  err << "query_time_s=" << std::fixed << std::setprecision(3) << query_s << "\n";
  return kExitOk;
}

std::vector<GroundTruthRegion> read_truths(const std::string& path, const Projection& projection,
                                           std::optional<double> enlarge_m) {
  require_file(path);
  auto truths = load_truths(path, projection);
  if (truths.empty()) throw UsageError("ground truth file '" + path + "' has no polygons");
  if (enlarge_m) {
    for (auto& t : truths) t.enlarge_m = *enlarge_m;
  }
  return truths;
}

void print_report(const EvaluationReport& r, std::ostream& out) {
  out << std::fixed << std::setprecision(1);
  out << "precision=" << r.precision << (r.precision_defined ? "" : " (undefined: no obstacles)")
      << "\n";
  out << "recall=" << r.recall << "\n";
  out << "f1=" << r.f1 << "\n";
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream&) {
  require_file(a.detections);
  const LoadedDetections det = load_detections(a.detections, ProjectionOrigin{});
  const Projection projection(det.origin);
  const auto truths = read_truths(a.truth, projection, a.enlarge_m);
  print_report(evaluate(det.obstacles, truths, {a.max_angle_deg}), out);
  return kExitOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
  Scenario sc;
  try {
    sc = generate_scenario(a.params);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(a.output_dir, ec);
  if (ec || !fs::is_directory(a.output_dir)) {
    throw UsageError("cannot create output directory '" + a.output_dir + "'");
  }
  const Projection projection(a.params.origin);
  auto write_csv = [&](const std::string& name, const std::vector<Trajectory>& trajs,
                       std::int64_t base) {
    std::vector<std::int64_t> starts;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      starts.push_back(base + static_cast<std::int64_t>(i) * 100000);
    }
    std::ostringstream text;
    write_tracks_csv(text, trajs, starts, a.params.interval_s, projection);
    const std::string path = (fs::path(a.output_dir) / name).string();
    try {
      write_text_file(path, text.str());
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
  };
  write_csv("reference.csv", sc.reference, 1600000000);
  write_csv("query.csv", sc.query, 1700000000);
  const GroundTruthRegion truths[] = {sc.truth};
  write_text_file((fs::path(a.output_dir) / "truth.geojson").string(),
                  canonical_dump(truths_to_geojson(truths, projection)));
  write_text_file((fs::path(a.output_dir) / "scenario.json").string(),
                  canonical_dump(scenario_params_to_json(a.params)));
  out << "reference_tracks=" << sc.reference.size() << "\n";
  out << "query_tracks=" << sc.query.size() << "\n";
  out << "truth_vertices=" << sc.truth.polygon.size() << "\n";
  return kExitOk;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  PreparedDetection prep = prepare_detection(a.detect, err);
  const auto truths = read_truths(a.truth, prep.projection, a.enlarge_m);
  out << "delta,tau,precision,recall,f1,obstacles,candidates,query_time_s\n";
  for (double tau : a.taus) {
    for (double delta : a.deltas) {
      DetectArgs point = a.detect;
      point.tau = tau;
      point.delta = delta;
      const DetectParams params = detect_params(point);
      const auto start = Clock::now();
      const DetectionResult result = detect(prep.reference, prep.query, params);
      const double query_s = seconds_since(start);
      const auto shapes = shapes_of(result);
      const EvaluationReport r = evaluate(shapes, truths);
      std::ostringstream row;
      row << std::setprecision(6) << delta << ',' << tau << ',' << std::fixed
          << std::setprecision(1) << r.precision << ',' << r.recall << ',' << r.f1 << ','
          << result.obstacles.size() << ',' << result.candidate_union().size() << ','
          << std::setprecision(4) << query_s;
      out << row.str() << "\n";
    }
  }
  return kExitOk;
}

void add_detect_options(CLI::App* cmd, DetectArgs& a) {
  cmd->add_option("--index", a.index, "Reference index file")->required();
  cmd->add_option("--query", a.query, "Query trajectory CSV")->required();
  cmd->add_option("--tau", a.tau, "z-score threshold")->capture_default_str();
  cmd->add_option("--delta", a.delta, "Support threshold")->capture_default_str();
  cmd->add_option("--sigma", a.sigma, "Kernel bandwidth (nDTW units)")->capture_default_str();
  cmd->add_option("--epsilon", a.epsilon, "Skip-closeness threshold (nDTW units)")
      ->capture_default_str();
  cmd->add_option("--k", a.k, "Neighbor count")->capture_default_str();
  cmd->add_option("--z-mode", a.z_mode, "z denominator")
      ->check(CLI::IsMember({"paper", "pooled"}))
      ->capture_default_str();
  cmd->add_option("--density-mode", a.density_mode, "Density normalization")
      ->check(CLI::IsMember({"kernel_sum", "paper_literal"}))
      ->capture_default_str();
  cmd->add_flag("--no-optimizations", a.no_optimizations, "Disable all search shortcuts");
  cmd->add_flag("--exact-knn", a.exact_knn, "Use linear-scan neighbor search");
  cmd->add_option("--interval-s", a.interval_s, "Resampling interval in seconds")
      ->capture_default_str();
  cmd->add_option("--max-gap-s", a.max_gap_s, "Split tracks at larger gaps (0: 10 x interval)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detect implicit obstacles from reference and query trajectories"};
  app.set_config("--config", "", "INI/TOML file with option defaults");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads");

  IndexArgs ia;
  auto* index = app.add_subcommand("index", "Build and persist a reference index");
  index->add_option("--input", ia.input, "Reference trajectory CSV")->required();
  index->add_option("--output", ia.output, "Index file to write")->required();
  index->add_option("--window", ia.window, "Window length (points)")->capture_default_str();
  index->add_option("--step", ia.step, "Window step (points)")->capture_default_str();
  index->add_option("--k", ia.k, "Neighbor count")->capture_default_str();
  index->add_option("--max-degree", ia.max_degree, "Graph out-degree M")->capture_default_str();
  index->add_option("--ef-construction", ia.ef_construction)->capture_default_str();
  index->add_option("--ef-search", ia.ef_search)->capture_default_str();
  index->add_option("--ef-distinct", ia.ef_distinct, "Distinct-parent beam width (parents)")
      ->capture_default_str();
  index->add_option("--seed", ia.seed, "Level-assignment seed")->capture_default_str();
  index->add_option("--interval-s", ia.interval_s, "Resampling interval in seconds")
      ->capture_default_str();
  index->add_option("--max-gap-s", ia.max_gap_s, "Split tracks at larger gaps (0: 10 x interval)");
  index->add_option("--origin-lat", ia.origin_lat, "Projection origin latitude");
  index->add_option("--origin-lon", ia.origin_lon, "Projection origin longitude");
  index->add_flag("--exact-knn", ia.exact_knn, "Precompute neighbor lists by linear scan");

  DetectArgs da;
  auto* det = app.add_subcommand("detect", "Detect obstacles for a query corpus");
  add_detect_options(det, da);
  det->add_option("--output", da.output, "GeoJSON file to write");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Score detections against ground truth");
  ev->add_option("--detections", ea.detections, "GeoJSON written by detect")->required();
  ev->add_option("--truth", ea.truth, "Ground-truth GeoJSON")->required();
  ev->add_option("--enlarge-m", ea.enlarge_m, "Override every truth buffer (meters)");
  ev->add_option("--max-angle-deg", ea.max_angle_deg, "Direction tolerance")->capture_default_str();

  SynthArgs sa;
  auto* syn = app.add_subcommand("synth", "Generate a planted-obstacle scenario");
  syn->add_option("--output-dir", sa.output_dir, "Directory for the generated files")->required();
  syn->add_option("--seed", sa.params.seed)->capture_default_str();
  syn->add_option("--reference-count", sa.params.reference_count)->capture_default_str();
  syn->add_option("--query-count", sa.params.query_count)->capture_default_str();
  syn->add_option("--corridor-length-m", sa.params.corridor_length_m)->capture_default_str();
  syn->add_option("--lane-half-width-m", sa.params.lane_half_width_m)->capture_default_str();
  syn->add_option("--disk-center-x-m", sa.params.disk_center_x_m)->capture_default_str();
  syn->add_option("--disk-center-y-m", sa.params.disk_center_y_m)->capture_default_str();
  syn->add_option("--disk-radius-m", sa.params.disk_radius_m)->capture_default_str();
  syn->add_option("--bypass-margin-m", sa.params.bypass_margin_m)->capture_default_str();
  syn->add_option("--speed-mps", sa.params.speed_mps)->capture_default_str();
  syn->add_option("--interval-s", sa.params.interval_s)->capture_default_str();
  syn->add_option("--noise-m", sa.params.noise_m)->capture_default_str();
  syn->add_flag("--two-sided", sa.params.two_sided, "Detour on alternating sides");

  SweepArgs wa;
  auto* sw = app.add_subcommand("sweep", "Grid of detections over delta and tau");
  add_detect_options(sw, wa.detect);
  sw->add_option("--truth", wa.truth, "Ground-truth GeoJSON")->required();
  sw->add_option("--deltas", wa.deltas, "Support thresholds")->delimiter(',')->capture_default_str();
  sw->add_option("--taus", wa.taus, "z thresholds")->delimiter(',')->capture_default_str();
  sw->add_option("--enlarge-m", wa.enlarge_m, "Override every truth buffer (meters)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (threads > 0) kernels::set_thread_count(threads);
  try {
    if (*index) return cmd_index(ia, out, err);
    if (*det) return cmd_detect(da, out, err);
    if (*ev) return cmd_eval(ea, out, err);
    if (*syn) return cmd_synth(sa, out, err);
    if (*sw) return cmd_sweep(wa, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace obsdet::cli

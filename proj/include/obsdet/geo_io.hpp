#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "obsdet/detector.hpp"
#include "obsdet/geo_point.hpp"
#include "obsdet/knn_index.hpp"
#include "obsdet/trajectory.hpp"

namespace obsdet {

/// Malformed or inconsistent input data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- tracks

struct RawSample {
  std::int64_t timestamp = 0;  // epoch seconds
  double lat = 0.0;
  double lon = 0.0;
};

struct RawTrack {
  std::string id;
  std::vector<RawSample> samples;  // strictly increasing timestamps
};

/// Parses `track_id,timestamp,lat,lon` CSV. Rows may be unsorted; tracks
/// are returned in order of first appearance with samples sorted by time.
/// Throws InputError with a line number on malformed rows, or naming the
/// track on duplicate timestamps.
std::vector<RawTrack> parse_tracks(std::istream& in, const std::string& source = "<input>");
std::vector<RawTrack> load_tracks(const std::string& path);

// ---------------------------------------------------------------- projection

inline constexpr double kEarthRadiusM = 6371000.0;

/// Local equirectangular projection about a fixed origin.
class Projection {
 public:
  explicit Projection(ProjectionOrigin origin);

  const ProjectionOrigin& origin() const { return origin_; }
  GeoPoint project(double lat, double lon) const;
  /// Inverse of project(): returns {lat, lon}.
  std::pair<double, double> unproject(GeoPoint p) const;

 private:
  ProjectionOrigin origin_;
  double cos_lat0_;
};

/// Center of the bounding box of every sample.
ProjectionOrigin bounding_box_center(std::span<const RawTrack> tracks);

// ---------------------------------------------------------------- interpolation

struct InterpolationParams {
  double interval_s = 10.0;
  double max_gap_s = 0.0;  // 0 selects 10 x interval_s

  double effective_max_gap() const { return max_gap_s > 0.0 ? max_gap_s : 10.0 * interval_s; }
};

struct InterpolationResult {
  std::vector<Trajectory> trajectories;
  std::size_t skipped_segments = 0;  // pieces too short to form a 2-point trajectory
};

/// Resamples at t0, t0 + interval, ... up to the last timestamp of each
/// gap-free piece, interpolating linearly in projected coordinates. Pieces
/// after the first get ids "<id>#<n>".
InterpolationResult interpolate(const RawTrack& track, const Projection& projection,
                                const InterpolationParams& params);
InterpolationResult interpolate_all(std::span<const RawTrack> tracks, const Projection& projection,
                                    const InterpolationParams& params);

/// Writes planar trajectories back to the CSV format, one sample per point
/// every `interval_s` seconds starting at `start_times[i]`.
void write_tracks_csv(std::ostream& out, std::span<const Trajectory> trajectories,
                      std::span<const std::int64_t> start_times, std::int64_t interval_s,
                      const Projection& projection);

// ---------------------------------------------------------------- regions and evaluation

struct GroundTruthRegion {
  std::vector<GeoPoint> polygon;  // planar ring without the closing vertex
  double enlarge_m = 2000.0;
};

/// Reads a FeatureCollection of Polygons; the optional `enlarge_m`
/// property defaults to 2000. Throws InputError on anything else.
std::vector<GroundTruthRegion> parse_truths(const nlohmann::json& doc, const Projection& projection);
std::vector<GroundTruthRegion> load_truths(const std::string& path, const Projection& projection);
nlohmann::json truths_to_geojson(std::span<const GroundTruthRegion> truths,
                                 const Projection& projection);

/// Geometry of a returned obstacle as needed by evaluation.
struct ObstacleShape {
  std::vector<GeoPoint> points;
  std::vector<GeoPoint> hull;
  GeoPoint mean_heading;
  std::size_t candidate_count = 0;
};

std::vector<ObstacleShape> shapes_of(const DetectionResult& result);

struct EvaluationOptions {
  double max_angle_deg = 90.0;
};

struct EvaluationReport {
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;  // false when nothing was returned
  std::size_t matched_obstacles = 0;
  std::size_t matched_truths = 0;
};

/// True iff the obstacle lies within `enlarge_m` of the truth polygon and its
/// heading points toward the truth centroid within the angle limit.
bool matches(const ObstacleShape& obstacle, const GroundTruthRegion& truth,
             const EvaluationOptions& options = {});

/// Throws std::invalid_argument if `truths` is empty.
EvaluationReport evaluate(std::span<const ObstacleShape> obstacles,
                          std::span<const GroundTruthRegion> truths,
                          const EvaluationOptions& options = {});

// ---------------------------------------------------------------- GeoJSON export

/// One hull feature (Polygon, LineString or Point by hull size) and one
/// MultiPoint of last points per obstacle, in [lon, lat] order. The
/// projection origin is kept as the foreign member "origin".
nlohmann::json detections_to_geojson(const DetectionResult& result, const Projection& projection);
void export_geojson(const DetectionResult& result, const Projection& projection,
                    const std::string& path);

struct LoadedDetections {
  ProjectionOrigin origin;
  bool has_origin = false;
  std::vector<ObstacleShape> obstacles;
};

/// Reads a file written by export_geojson(); planar coordinates use the
/// embedded origin, or `fallback` when absent.
LoadedDetections parse_detections(const nlohmann::json& doc, const ProjectionOrigin& fallback);
LoadedDetections load_detections(const std::string& path, const ProjectionOrigin& fallback);

/// Canonical text form (2-space indent, trailing newline).
std::string canonical_dump(const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// ---------------------------------------------------------------- synthetic scenarios

/// A straight corridor along +x through a planted disk. Reference
/// trajectories cross the disk; query trajectories detour around it on a
/// circular arc of radius disk_radius + bypass_margin.
struct ScenarioParams {
  std::size_t reference_count = 50;
  std::size_t query_count = 50;
  double corridor_length_m = 6000.0;
  double lane_half_width_m = 200.0;
  double disk_center_x_m = 3000.0;
  double disk_center_y_m = 0.0;
  double disk_radius_m = 600.0;
  double bypass_margin_m = 30.0;
  double speed_mps = 10.0;
  std::int64_t interval_s = 10;
  double noise_m = 3.0;
  bool two_sided = false;
  std::uint64_t seed = 42;
  ProjectionOrigin origin{1.25, 103.8};

  /// Throws std::invalid_argument on degenerate geometry.
  void validate() const;
};

struct Scenario {
  ScenarioParams params;
  std::vector<Trajectory> reference;
  std::vector<Trajectory> query;
  GroundTruthRegion truth;  // the disk as a 32-gon, enlarge_m = 0
};

Scenario generate_scenario(const ScenarioParams& params);

nlohmann::json scenario_params_to_json(const ScenarioParams& params);
ScenarioParams scenario_params_from_json(const nlohmann::json& doc);

}  // namespace obsdet

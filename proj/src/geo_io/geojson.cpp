#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "obsdet/geo_io.hpp"
#include "obsdet/geometry.hpp"

namespace obsdet {

using nlohmann::json;

namespace {

json lonlat(const Projection& projection, GeoPoint p) {
  const auto [lat, lon] = projection.unproject(p);
  return json::array({lon, lat});
}

GeoPoint planar(const Projection& projection, const json& position) {
  if (!position.is_array() || position.size() < 2 || !position[0].is_number() ||
      !position[1].is_number()) {
    throw InputError("GeoJSON position must be [lon, lat]");
  }
  return projection.project(position[1].get<double>(), position[0].get<double>());
}

json ring(const Projection& projection, std::span<const GeoPoint> polygon) {
  json r = json::array();
  for (const GeoPoint& p : polygon) r.push_back(lonlat(projection, p));
  r.push_back(lonlat(projection, polygon.front()));
  return r;
}

std::vector<GeoPoint> read_ring(const Projection& projection, const json& r) {
  if (!r.is_array()) throw InputError("GeoJSON ring must be an array");
  std::vector<GeoPoint> out;
  for (const json& pos : r) out.push_back(planar(projection, pos));
  if (out.size() >= 2 && out.front() == out.back()) out.pop_back();
  return out;
}

const json& features_of(const json& doc) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw InputError("expected a GeoJSON FeatureCollection");
  }
  return doc["features"];
}

}  // namespace

std::string canonical_dump(const json& doc) { return doc.dump(2) + "\n"; }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<GroundTruthRegion> parse_truths(const json& doc, const Projection& projection) {
  std::vector<GroundTruthRegion> truths;
  for (const json& f : features_of(doc)) {
    const json& geom = f.at("geometry");
    if (geom.value("type", "") != "Polygon") throw InputError("ground truth must be Polygons");
    GroundTruthRegion region;
    region.polygon = read_ring(projection, geom.at("coordinates").at(0));
    if (region.polygon.size() < 3) throw InputError("ground truth polygon needs >= 3 vertices");
    if (f.contains("properties") && f["properties"].is_object()) {
      region.enlarge_m = f["properties"].value("enlarge_m", 2000.0);
    }
    if (!(region.enlarge_m >= 0.0)) throw InputError("enlarge_m must be >= 0");
    truths.push_back(std::move(region));
  }
  return truths;
}

std::vector<GroundTruthRegion> load_truths(const std::string& path, const Projection& projection) {
  return parse_truths(read_json_file(path), projection);
}

json truths_to_geojson(std::span<const GroundTruthRegion> truths, const Projection& projection) {
  json features = json::array();
  for (const GroundTruthRegion& t : truths) {
    features.push_back({{"type", "Feature"},
                        {"properties", {{"enlarge_m", t.enlarge_m}}},
                        {"geometry", {{"type", "Polygon"},
                                      {"coordinates", json::array({ring(projection, t.polygon)})}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

std::vector<ObstacleShape> shapes_of(const DetectionResult& result) {
  std::vector<ObstacleShape> shapes;
  for (const Obstacle& o : result.obstacles) {
    shapes.push_back({o.points, o.hull, o.mean_heading, o.candidates.size()});
  }
  return shapes;
}

json detections_to_geojson(const DetectionResult& result, const Projection& projection) {
  json features = json::array();
  for (std::size_t i = 0; i < result.obstacles.size(); ++i) {
    const Obstacle& o = result.obstacles[i];
    const json props = {{"obstacle", i},
                        {"candidate_count", o.candidates.size()},
                        {"mean_heading", {o.mean_heading.x, o.mean_heading.y}}};
    json hull_geom;
    if (o.hull.size() >= 3) {
      hull_geom = {{"type", "Polygon"}, {"coordinates", json::array({ring(projection, o.hull)})}};
    } else if (o.hull.size() == 2) {
      hull_geom = {{"type", "LineString"},
                   {"coordinates", {lonlat(projection, o.hull[0]), lonlat(projection, o.hull[1])}}};
    } else {
      hull_geom = {{"type", "Point"}, {"coordinates", lonlat(projection, o.hull.at(0))}};
    }
    json hull_props = props;
    hull_props["role"] = "hull";
    features.push_back({{"type", "Feature"}, {"properties", hull_props}, {"geometry", hull_geom}});

    json pts = json::array();
    for (const GeoPoint& p : o.points) pts.push_back(lonlat(projection, p));
    json pt_props = props;
    pt_props["role"] = "last_points";
    features.push_back({{"type", "Feature"},
                        {"properties", pt_props},
                        {"geometry", {{"type", "MultiPoint"}, {"coordinates", pts}}}});
  }
  const ProjectionOrigin& origin = projection.origin();
  return {{"type", "FeatureCollection"},
          {"origin", {origin.lon, origin.lat}},
          {"features", features}};
}

void export_geojson(const DetectionResult& result, const Projection& projection,
                    const std::string& path) {
  write_text_file(path, canonical_dump(detections_to_geojson(result, projection)));
}

LoadedDetections parse_detections(const json& doc, const ProjectionOrigin& fallback) {
  LoadedDetections out;
  const json& features = features_of(doc);
  out.origin = fallback;
  if (doc.contains("origin")) {
    const json& o = doc["origin"];
    if (!o.is_array() || o.size() != 2) throw InputError("origin must be [lon, lat]");
    out.origin = {o[1].get<double>(), o[0].get<double>()};
    out.has_origin = true;
  }
  const Projection projection(out.origin);
  for (const json& f : features) {
    const json& props = f.at("properties");
    const auto idx = props.at("obstacle").get<std::size_t>();
    if (idx >= out.obstacles.size()) out.obstacles.resize(idx + 1);
    ObstacleShape& shape = out.obstacles[idx];
    shape.candidate_count = props.value("candidate_count", std::size_t{0});
    if (props.contains("mean_heading")) {
      const json& h = props["mean_heading"];
      shape.mean_heading = {h.at(0).get<double>(), h.at(1).get<double>()};
    }
    const json& geom = f.at("geometry");
    const std::string type = geom.at("type").get<std::string>();
    const json& coords = geom.at("coordinates");
    if (type == "Polygon") {
      shape.hull = read_ring(projection, coords.at(0));
    } else if (type == "LineString") {
      shape.hull = read_ring(projection, coords);
    } else if (type == "Point") {
      shape.hull = {planar(projection, coords)};
    } else if (type == "MultiPoint") {
      for (const json& pos : coords) shape.points.push_back(planar(projection, pos));
    } else {
      throw InputError("unexpected geometry type '" + type + "' in detections");
    }
  }
  return out;
}

LoadedDetections load_detections(const std::string& path, const ProjectionOrigin& fallback) {
  return parse_detections(read_json_file(path), fallback);
}

bool matches(const ObstacleShape& obstacle, const GroundTruthRegion& truth,
             const EvaluationOptions& options) {
  const std::span<const GeoPoint> shape =
      obstacle.hull.empty() ? std::span<const GeoPoint>(obstacle.points) : obstacle.hull;
  double gap = shape_distance(shape, truth.polygon);
  for (const GeoPoint& p : obstacle.points) {
    gap = std::min(gap, shape_distance(std::span<const GeoPoint>(&p, 1), truth.polygon));
  }
  if (!(gap <= truth.enlarge_m)) return false;

  const GeoPoint from = mean(obstacle.points.empty() ? shape : obstacle.points);
  const GeoPoint toward = polygon_centroid(truth.polygon) - from;
  const double tn = norm(toward);
  const double hn = norm(obstacle.mean_heading);
  if (tn == 0.0 || hn == 0.0) return true;  // no direction to disagree with
  const double cos_angle = (toward.x * obstacle.mean_heading.x + toward.y * obstacle.mean_heading.y) /
                           (tn * hn);
  const double angle_deg = std::acos(std::clamp(cos_angle, -1.0, 1.0)) * 180.0 / std::numbers::pi;
  return angle_deg < options.max_angle_deg;
}

EvaluationReport evaluate(std::span<const ObstacleShape> obstacles,
                          std::span<const GroundTruthRegion> truths,
                          const EvaluationOptions& options) {
  if (truths.empty()) throw std::invalid_argument("evaluation needs at least one ground truth");
  EvaluationReport report;
  std::vector<bool> truth_hit(truths.size(), false);
  for (const ObstacleShape& o : obstacles) {
    bool hit = false;
    for (std::size_t j = 0; j < truths.size(); ++j) {
      if (matches(o, truths[j], options)) {
        hit = true;
        truth_hit[j] = true;
      }
    }
    if (hit) ++report.matched_obstacles;
  }
  report.matched_truths = static_cast<std::size_t>(std::count(truth_hit.begin(), truth_hit.end(), true));
  report.precision_defined = !obstacles.empty();
  report.precision = obstacles.empty() ? 0.0
                                       : 100.0 * static_cast<double>(report.matched_obstacles) /
                                             static_cast<double>(obstacles.size());
  report.recall =
      100.0 * static_cast<double>(report.matched_truths) / static_cast<double>(truths.size());
  const double sum = report.precision + report.recall;
  report.f1 = sum > 0.0 ? 2.0 * report.precision * report.recall / sum : 0.0;
  return report;
}

}  // namespace obsdet

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "obsdet/geo_io.hpp"

namespace obsdet {
namespace {

// Seeded generator with hand-rolled uniform/normal draws so the output does
// not depend on the standard library's distribution implementations.
class ScenarioRng {
 public:
  explicit ScenarioRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    // Box-Muller, one draw per call
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// A lane along +x at height `y` that optionally bypasses the disk on an arc.
class LanePath {
 public:
  LanePath(const ScenarioParams& p, double y, int detour_side) : p_(p), y_(y), side_(detour_side) {
    if (side_ == 0) return;
    const double radius = p.disk_radius_m + p.bypass_margin_m;
    const double s = std::asin((y_ - p.disk_center_y_m) / radius);
    if (side_ > 0) {  // over the north: angle runs from pi - s down to s
      theta_in_ = std::numbers::pi - s;
      theta_out_ = s;
    } else {  // under the south: angle runs from -pi - s up to s
      theta_in_ = -std::numbers::pi - s;
      theta_out_ = s;
    }
    const double half_chord = radius * std::cos(s);
    x_in_ = p.disk_center_x_m - half_chord;
    x_out_ = p.disk_center_x_m + half_chord;
    arc_ = radius * std::abs(theta_in_ - theta_out_);
  }

  double length(double x0) const {
    const double straight = p_.corridor_length_m - x0;
    return side_ == 0 ? straight : straight - (x_out_ - x_in_) + arc_;
  }

  GeoPoint at(double x0, double s) const {
    if (side_ == 0 || x0 + s <= x_in_) return {x0 + s, y_};
    const double into_arc = s - (x_in_ - x0);
    if (into_arc >= arc_) return {x_out_ + (into_arc - arc_), y_};
    const double radius = p_.disk_radius_m + p_.bypass_margin_m;
    const double frac = into_arc / arc_;
    const double theta = theta_in_ + frac * (theta_out_ - theta_in_);
    return {p_.disk_center_x_m + radius * std::cos(theta),
            p_.disk_center_y_m + radius * std::sin(theta)};
  }

 private:
  const ScenarioParams& p_;
  double y_;
  int side_;
  double theta_in_ = 0.0, theta_out_ = 0.0, x_in_ = 0.0, x_out_ = 0.0, arc_ = 0.0;
};

Trajectory sample_lane(const ScenarioParams& p, ScenarioRng& rng, const std::string& id,
                       int detour_side) {
  const double y = rng.uniform(-p.lane_half_width_m, p.lane_half_width_m);
  const double step = p.speed_mps * static_cast<double>(p.interval_s);
  const double x0 = rng.uniform(0.0, step);
  const LanePath path(p, y, detour_side);
  Trajectory t;
  t.id = id;
  const double total = path.length(x0);
  for (double s = 0.0; s <= total; s += step) {
    GeoPoint pt = path.at(x0, s);
    pt.x += p.noise_m * rng.normal();
    pt.y += p.noise_m * rng.normal();
    t.points.push_back(pt);
  }
  return t;
}

}  // namespace

void ScenarioParams::validate() const {
  if (reference_count < 10 || query_count < 10) {
    throw std::invalid_argument("scenario needs at least 10 reference and 10 query trajectories");
  }
  if (!(corridor_length_m > 0.0) || !(lane_half_width_m >= 0.0) || !(disk_radius_m > 0.0) ||
      !(bypass_margin_m > 0.0) || !(speed_mps > 0.0) || interval_s <= 0 || !(noise_m >= 0.0)) {
    throw std::invalid_argument("scenario parameters must be positive");
  }
  const double radius = disk_radius_m + bypass_margin_m;
  if (std::abs(disk_center_y_m) + lane_half_width_m >= disk_radius_m) {
    throw std::invalid_argument("planted disk does not cover every lane of the corridor");
  }
  const double step = speed_mps * static_cast<double>(interval_s);
  if (disk_center_x_m - radius < step || disk_center_x_m + radius > corridor_length_m) {
    throw std::invalid_argument("planted disk lies outside the corridor");
  }
}

Scenario generate_scenario(const ScenarioParams& params) {
  params.validate();
  Scenario sc;
  sc.params = params;
  ScenarioRng rng(params.seed);
  for (std::size_t i = 0; i < params.reference_count; ++i) {
    sc.reference.push_back(sample_lane(params, rng, "ref-" + std::to_string(i), 0));
  }
  for (std::size_t i = 0; i < params.query_count; ++i) {
    const int side = params.two_sided && i % 2 == 1 ? -1 : 1;
    sc.query.push_back(sample_lane(params, rng, "qry-" + std::to_string(i), side));
  }
  constexpr int kTruthVertices = 32;
  for (int i = 0; i < kTruthVertices; ++i) {
    const double a = 2.0 * std::numbers::pi * i / kTruthVertices;
    sc.truth.polygon.push_back({params.disk_center_x_m + params.disk_radius_m * std::cos(a),
                                params.disk_center_y_m + params.disk_radius_m * std::sin(a)});
  }
  sc.truth.enlarge_m = 0.0;
  return sc;
}

nlohmann::json scenario_params_to_json(const ScenarioParams& p) {
  return {{"generator", "planted-disk-corridor"},
          {"version", 1},
          {"reference_count", p.reference_count},
          {"query_count", p.query_count},
          {"corridor_length_m", p.corridor_length_m},
          {"lane_half_width_m", p.lane_half_width_m},
          {"disk_center_x_m", p.disk_center_x_m},
          {"disk_center_y_m", p.disk_center_y_m},
          {"disk_radius_m", p.disk_radius_m},
          {"bypass_margin_m", p.bypass_margin_m},
          {"speed_mps", p.speed_mps},
          {"interval_s", p.interval_s},
          {"noise_m", p.noise_m},
          {"two_sided", p.two_sided},
          {"seed", p.seed},
          {"origin", {{"lat", p.origin.lat}, {"lon", p.origin.lon}}}};
}

ScenarioParams scenario_params_from_json(const nlohmann::json& doc) {
  ScenarioParams p;
  try {
    p.reference_count = doc.value("reference_count", p.reference_count);
    p.query_count = doc.value("query_count", p.query_count);
    p.corridor_length_m = doc.value("corridor_length_m", p.corridor_length_m);
    p.lane_half_width_m = doc.value("lane_half_width_m", p.lane_half_width_m);
    p.disk_center_x_m = doc.value("disk_center_x_m", p.disk_center_x_m);
    p.disk_center_y_m = doc.value("disk_center_y_m", p.disk_center_y_m);
    p.disk_radius_m = doc.value("disk_radius_m", p.disk_radius_m);
    p.bypass_margin_m = doc.value("bypass_margin_m", p.bypass_margin_m);
    p.speed_mps = doc.value("speed_mps", p.speed_mps);
    p.interval_s = doc.value("interval_s", p.interval_s);
    p.noise_m = doc.value("noise_m", p.noise_m);
    p.two_sided = doc.value("two_sided", p.two_sided);
    p.seed = doc.value("seed", p.seed);
    if (doc.contains("origin")) {
      p.origin.lat = doc["origin"].value("lat", p.origin.lat);
      p.origin.lon = doc["origin"].value("lon", p.origin.lon);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad scenario document: ") + e.what());
  }
  return p;
}

}  // namespace obsdet

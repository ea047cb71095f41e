#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "obsdet/geo_io.hpp"

namespace obsdet {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
  throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<RawTrack> parse_tracks(std::istream& in, const std::string& source) {
  std::vector<RawTrack> tracks;
  std::unordered_map<std::string, std::size_t> slot;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 4 || fields[0] != "track_id" || fields[1] != "timestamp" ||
          fields[2] != "lat" || fields[3] != "lon") {
        fail_at(source, line_no, "expected header 'track_id,timestamp,lat,lon'");
      }
      continue;
    }
    if (fields.size() != 4) fail_at(source, line_no, "expected 4 fields");
    if (fields[0].empty()) fail_at(source, line_no, "empty track_id");
    RawSample s;
    if (!parse_number(fields[1], s.timestamp)) fail_at(source, line_no, "bad timestamp");
    if (!parse_number(fields[2], s.lat) || !std::isfinite(s.lat) || std::abs(s.lat) > 90.0) {
      fail_at(source, line_no, "bad latitude");
    }
    if (!parse_number(fields[3], s.lon) || !std::isfinite(s.lon) || std::abs(s.lon) > 180.0) {
      fail_at(source, line_no, "bad longitude");
    }
    const std::string id(fields[0]);
    auto [it, inserted] = slot.try_emplace(id, tracks.size());
    if (inserted) tracks.push_back({id, {}});
    tracks[it->second].samples.push_back(s);
  }
  for (RawTrack& t : tracks) {
    std::stable_sort(t.samples.begin(), t.samples.end(),
                     [](const RawSample& a, const RawSample& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 1; i < t.samples.size(); ++i) {
      if (t.samples[i].timestamp == t.samples[i - 1].timestamp) {
        throw InputError(source + ": track '" + t.id + "' has duplicate timestamp " +
                         std::to_string(t.samples[i].timestamp));
      }
    }
  }
  return tracks;
}

std::vector<RawTrack> load_tracks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_tracks(in, path);
}

Projection::Projection(ProjectionOrigin origin)
    : origin_(origin), cos_lat0_(std::cos(origin.lat * std::numbers::pi / 180.0)) {}

GeoPoint Projection::project(double lat, double lon) const {
  constexpr double kRad = std::numbers::pi / 180.0;
  return {kEarthRadiusM * (lon - origin_.lon) * cos_lat0_ * kRad,
          kEarthRadiusM * (lat - origin_.lat) * kRad};
}

std::pair<double, double> Projection::unproject(GeoPoint p) const {
  constexpr double kDeg = 180.0 / std::numbers::pi;
  return {origin_.lat + p.y / kEarthRadiusM * kDeg,
          origin_.lon + p.x / (kEarthRadiusM * cos_lat0_) * kDeg};
}

ProjectionOrigin bounding_box_center(std::span<const RawTrack> tracks) {
  double lat_min = 90.0, lat_max = -90.0, lon_min = 180.0, lon_max = -180.0;
  bool any = false;
  for (const RawTrack& t : tracks) {
    for (const RawSample& s : t.samples) {
      any = true;
      lat_min = std::min(lat_min, s.lat);
      lat_max = std::max(lat_max, s.lat);
      lon_min = std::min(lon_min, s.lon);
      lon_max = std::max(lon_max, s.lon);
    }
  }
  if (!any) return {};
  return {(lat_min + lat_max) / 2.0, (lon_min + lon_max) / 2.0};
}

InterpolationResult interpolate(const RawTrack& track, const Projection& projection,
                                const InterpolationParams& params) {
  if (!(params.interval_s > 0.0)) throw std::invalid_argument("interval must be > 0");
  InterpolationResult result;
  const auto& samples = track.samples;
  const double max_gap = params.effective_max_gap();

  std::size_t begin = 0;
  std::size_t piece = 0;
  while (begin < samples.size()) {
    std::size_t end = begin + 1;
    while (end < samples.size() &&
           static_cast<double>(samples[end].timestamp - samples[end - 1].timestamp) <= max_gap) {
      ++end;
    }
    // samples[begin, end) has no gap above max_gap
    Trajectory t;
    t.id = piece == 0 ? track.id : track.id + "#" + std::to_string(piece);
    const auto t0 = static_cast<double>(samples[begin].timestamp);
    const auto t_last = static_cast<double>(samples[end - 1].timestamp);
    std::size_t seg = begin;
    for (std::size_t i = 0;; ++i) {
      const double ts = t0 + static_cast<double>(i) * params.interval_s;
      if (ts > t_last) break;
      while (seg + 1 < end - 1 && static_cast<double>(samples[seg + 1].timestamp) < ts) ++seg;
      const RawSample& a = samples[seg];
      if (seg + 1 >= end) {
        t.points.push_back(projection.project(a.lat, a.lon));
        continue;
      }
      const RawSample& b = samples[seg + 1];
      const GeoPoint pa = projection.project(a.lat, a.lon);
      const GeoPoint pb = projection.project(b.lat, b.lon);
      const double span = static_cast<double>(b.timestamp - a.timestamp);
      const double f = std::clamp((ts - static_cast<double>(a.timestamp)) / span, 0.0, 1.0);
      t.points.push_back(pa + f * (pb - pa));
    }
    if (t.points.size() >= 2) {
      result.trajectories.push_back(std::move(t));
      ++piece;
    } else {
      ++result.skipped_segments;
    }
    begin = end;
  }
  return result;
}

InterpolationResult interpolate_all(std::span<const RawTrack> tracks, const Projection& projection,
                                    const InterpolationParams& params) {
  InterpolationResult all;
  for (const RawTrack& t : tracks) {
    InterpolationResult r = interpolate(t, projection, params);
    all.skipped_segments += r.skipped_segments;
    for (Trajectory& traj : r.trajectories) all.trajectories.push_back(std::move(traj));
  }
  return all;
}

void write_tracks_csv(std::ostream& out, std::span<const Trajectory> trajectories,
                      std::span<const std::int64_t> start_times, std::int64_t interval_s,
                      const Projection& projection) {
  out << "track_id,timestamp,lat,lon\n";
  out << std::fixed << std::setprecision(9);
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& t = trajectories[i];
    for (std::size_t j = 0; j < t.points.size(); ++j) {
      const auto [lat, lon] = projection.unproject(t.points[j]);
      out << t.id << ',' << start_times[i] + static_cast<std::int64_t>(j) * interval_s << ','
          << lat << ',' << lon << '\n';
    }
  }
}

}  // namespace obsdet

#pragma once

#include <cmath>

namespace obsdet {

/// Planar position in meters (x east, y north) after local projection.
struct GeoPoint {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

constexpr GeoPoint operator+(GeoPoint a, GeoPoint b) { return {a.x + b.x, a.y + b.y}; }
constexpr GeoPoint operator-(GeoPoint a, GeoPoint b) { return {a.x - b.x, a.y - b.y}; }
constexpr GeoPoint operator*(double c, GeoPoint a) { return {c * a.x, c * a.y}; }

inline bool is_finite(GeoPoint p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline double norm(GeoPoint v) { return std::sqrt(v.x * v.x + v.y * v.y); }

}  // namespace obsdet

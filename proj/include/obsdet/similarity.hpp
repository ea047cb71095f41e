#pragma once

#include <cmath>
#include <span>

#include "obsdet/geo_point.hpp"

namespace obsdet {

/// Straight-line distance in meters.
inline double euclidean(GeoPoint a, GeoPoint b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// Dynamic time warping cost between two point sequences of any positive
/// lengths. Throws std::invalid_argument if either is empty.
double dtw(std::span<const GeoPoint> t, std::span<const GeoPoint> q);

/// Sum of consecutive segment lengths.
double path_length(std::span<const GeoPoint> t);

/// DTW divided by sqrt(path_length(t)) * sqrt(path_length(q)).
/// Returns +infinity when either sequence is stationary.
double ndtw(std::span<const GeoPoint> t, std::span<const GeoPoint> q);

/// ndtw() with both square-rooted path lengths already known.
double ndtw_prepared(std::span<const GeoPoint> t, double t_sqrt_length,
                     std::span<const GeoPoint> q, double q_sqrt_length);

/// ndtw_prepared() that may give up early: returns +infinity once the result
/// provably exceeds `bound`, and the exact value whenever it is <= bound.
double ndtw_bounded(std::span<const GeoPoint> t, double t_sqrt_length,
                    std::span<const GeoPoint> q, double q_sqrt_length, double bound);

}  // namespace obsdet

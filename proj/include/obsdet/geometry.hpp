#pragma once

#include <span>
#include <vector>

#include "obsdet/geo_point.hpp"

namespace obsdet {

/// z-component of (b - a) x (c - a); positive for a counter-clockwise turn.
inline double cross(GeoPoint a, GeoPoint b, GeoPoint c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// Monotone-chain convex hull, counter-clockwise without repeating the first
/// vertex. Collinear inputs give the two extreme points; one distinct input
/// gives a single point.
std::vector<GeoPoint> convex_hull(std::vector<GeoPoint> points);

/// Even-odd containment; points on the boundary count as inside.
bool contains(std::span<const GeoPoint> polygon, GeoPoint p);

double segment_distance(GeoPoint p, GeoPoint a, GeoPoint b);
double segment_segment_distance(GeoPoint a, GeoPoint b, GeoPoint c, GeoPoint d);

/// Minimum distance between two shapes, each a point, a segment, or a
/// closed polygon ring (vertices without repetition). Zero when they overlap.
double shape_distance(std::span<const GeoPoint> a, std::span<const GeoPoint> b);

/// Signed-area centroid of a simple polygon; vertex mean if the area vanishes.
GeoPoint polygon_centroid(std::span<const GeoPoint> polygon);

GeoPoint mean(std::span<const GeoPoint> points);

}  // namespace obsdet

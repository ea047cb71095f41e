#include "obsdet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace obsdet {

std::vector<GeoPoint> convex_hull(std::vector<GeoPoint> points) {
  std::sort(points.begin(), points.end(), [](GeoPoint a, GeoPoint b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;

  std::vector<GeoPoint> hull(2 * points.size());
  std::size_t n = 0;
  for (const GeoPoint& p : points) {
    while (n >= 2 && cross(hull[n - 2], hull[n - 1], p) <= 0.0) --n;
    hull[n++] = p;
  }
  const std::size_t lower = n + 1;
  for (auto it = points.rbegin() + 1; it != points.rend(); ++it) {
    while (n >= lower && cross(hull[n - 2], hull[n - 1], *it) <= 0.0) --n;
    hull[n++] = *it;
  }
  hull.resize(n - 1);
  return hull;
}

bool contains(std::span<const GeoPoint> polygon, GeoPoint p) {
  const std::size_t n = polygon.size();
  if (n == 0) return false;
  if (n < 3) {
    return n == 1 ? polygon[0] == p : segment_distance(p, polygon[0], polygon[1]) == 0.0;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const GeoPoint a = polygon[i];
    const GeoPoint b = polygon[j];
    if (segment_distance(p, a, b) == 0.0) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double segment_distance(GeoPoint p, GeoPoint a, GeoPoint b) {
  const GeoPoint ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

namespace {

int orientation(GeoPoint a, GeoPoint b, GeoPoint c) {
  const double v = cross(a, b, c);
  return (v > 0.0) - (v < 0.0);
}

bool segments_cross(GeoPoint a, GeoPoint b, GeoPoint c, GeoPoint d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

// Edges of a shape: a point is a zero-length edge, a segment one edge, a ring n edges.
template <typename F>
void for_each_edge(std::span<const GeoPoint> s, F&& f) {
  if (s.size() == 1) {
    f(s[0], s[0]);
  } else if (s.size() == 2) {
    f(s[0], s[1]);
  } else {
    for (std::size_t i = 0; i < s.size(); ++i) f(s[i], s[(i + 1) % s.size()]);
  }
}

}  // namespace

double segment_segment_distance(GeoPoint a, GeoPoint b, GeoPoint c, GeoPoint d) {
  if (segments_cross(a, b, c, d)) return 0.0;
  return std::min({segment_distance(a, c, d), segment_distance(b, c, d),
                   segment_distance(c, a, b), segment_distance(d, a, b)});
}

double shape_distance(std::span<const GeoPoint> a, std::span<const GeoPoint> b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  if (a.size() >= 3 && contains(a, b[0])) return 0.0;
  if (b.size() >= 3 && contains(b, a[0])) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for_each_edge(a, [&](GeoPoint p, GeoPoint q) {
    for_each_edge(b, [&](GeoPoint r, GeoPoint s) {
      best = std::min(best, segment_segment_distance(p, q, r, s));
    });
  });
  return best;
}

GeoPoint mean(std::span<const GeoPoint> points) {
  GeoPoint sum;
  for (const GeoPoint& p : points) sum = sum + p;
  return points.empty() ? sum : (1.0 / static_cast<double>(points.size())) * sum;
}

GeoPoint polygon_centroid(std::span<const GeoPoint> polygon) {
  if (polygon.size() < 3) return mean(polygon);
  // shift to the first vertex to keep the cross products well conditioned
  const GeoPoint o = polygon[0];
  double area2 = 0.0;
  GeoPoint acc;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const GeoPoint a = polygon[i] - o;
    const GeoPoint b = polygon[(i + 1) % polygon.size()] - o;
    const double c = a.x * b.y - b.x * a.y;
    area2 += c;
    acc = acc + c * (a + b);
  }
  if (std::abs(area2) < 1e-12) return mean(polygon);
  return o + (1.0 / (3.0 * area2)) * acc;
}

}  // namespace obsdet

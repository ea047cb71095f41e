#include "obsdet/similarity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace obsdet {
namespace {

constexpr std::size_t kInlineRow = 32;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rolling two-row DP over the (l x h) table; row index walks t, column walks q.
// Every warping path crosses every row and costs are non-negative, so a row
// whose minimum exceeds `limit` proves the total does too.
double dtw_rows(std::span<const GeoPoint> t, std::span<const GeoPoint> q, double* prev,
                double* cur, double limit) {
  const std::size_t h = q.size();
  prev[0] = euclidean(t[0], q[0]);
  double row_min = prev[0];
  for (std::size_t j = 1; j < h; ++j) prev[j] = prev[j - 1] + euclidean(t[0], q[j]);
  if (row_min > limit) return kInf;
  for (std::size_t i = 1; i < t.size(); ++i) {
    cur[0] = prev[0] + euclidean(t[i], q[0]);
    row_min = cur[0];
    for (std::size_t j = 1; j < h; ++j) {
      cur[j] = euclidean(t[i], q[j]) + std::min({prev[j - 1], prev[j], cur[j - 1]});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > limit) return kInf;
    std::swap(prev, cur);
  }
  return prev[h - 1];
}

double dtw_limited(std::span<const GeoPoint> t, std::span<const GeoPoint> q, double limit) {
  if (t.empty() || q.empty()) throw std::invalid_argument("dtw of an empty sequence");
  if (q.size() <= kInlineRow) {
    std::array<double, kInlineRow> a;
    std::array<double, kInlineRow> b;
    return dtw_rows(t, q, a.data(), b.data(), limit);
  }
  std::vector<double> a(q.size());
  std::vector<double> b(q.size());
  return dtw_rows(t, q, a.data(), b.data(), limit);
}

}  // namespace

double dtw(std::span<const GeoPoint> t, std::span<const GeoPoint> q) {
  return dtw_limited(t, q, kInf);
}

double path_length(std::span<const GeoPoint> t) {
  double total = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) total += euclidean(t[i - 1], t[i]);
  return total;
}

double ndtw_prepared(std::span<const GeoPoint> t, double t_sqrt_length,
                     std::span<const GeoPoint> q, double q_sqrt_length) {
  if (t_sqrt_length == 0.0 || q_sqrt_length == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return dtw(t, q) / (t_sqrt_length * q_sqrt_length);
}

double ndtw_bounded(std::span<const GeoPoint> t, double t_sqrt_length,
                    std::span<const GeoPoint> q, double q_sqrt_length, double bound) {
  if (t_sqrt_length == 0.0 || q_sqrt_length == 0.0) return kInf;
  const double scale = t_sqrt_length * q_sqrt_length;
  // the slack absorbs rounding between the two units, so abandoning never
  // discards a value that would have compared <= bound
  const double limit = bound * scale * (1.0 + 1e-9);
  return dtw_limited(t, q, limit) / scale;
}

double ndtw(std::span<const GeoPoint> t, std::span<const GeoPoint> q) {
  return ndtw_prepared(t, std::sqrt(path_length(t)), q, std::sqrt(path_length(q)));
}

}  // namespace obsdet

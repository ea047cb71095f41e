#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "obsdet/similarity.hpp"
#include "oracles.hpp"

using namespace obsdet;

namespace {
std::vector<GeoPoint> random_points(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<GeoPoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  return pts;
}

std::vector<GeoPoint> transform(const std::vector<GeoPoint>& pts, double scale, double angle,
                                GeoPoint shift) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  std::vector<GeoPoint> out;
  for (GeoPoint p : pts) {
    out.push_back({scale * (c * p.x - s * p.y) + shift.x, scale * (s * p.x + c * p.y) + shift.y});
  }
  return out;
}
}  // namespace

TEST_CASE("euclidean distance") {
  CHECK(euclidean({0, 0}, {3, 4}) == 5.0);
  CHECK(euclidean({1, 1}, {1, 1}) == 0.0);
  CHECK(euclidean({-2, 0}, {2, 0}) == 4.0);
}

TEST_CASE("dtw examples") {
  const std::vector<GeoPoint> t{{0, 0}, {1, 0}, {2, 0}};
  CHECK(dtw(t, t) == 0.0);
  CHECK(dtw(std::vector<GeoPoint>{{0, 0}}, std::vector<GeoPoint>{{3, 4}}) == 5.0);
  const std::vector<GeoPoint> a{{0, 0}, {1, 0}};
  const std::vector<GeoPoint> b{{0, 1}, {1, 1}};
  CHECK(dtw(a, b) == 2.0);
}

TEST_CASE("dtw rejects empty input") {
  const std::vector<GeoPoint> t{{0, 0}};
  CHECK_THROWS_AS(dtw(std::vector<GeoPoint>{}, t), std::invalid_argument);
  CHECK_THROWS_AS(dtw(t, std::vector<GeoPoint>{}), std::invalid_argument);
}

TEST_CASE("dtw matches exhaustive path enumeration") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const auto t = random_points(rng, 1 + rng() % 5);
    const auto q = random_points(rng, 1 + rng() % 5);
    REQUIRE(dtw(t, q) == oracle::dtw_by_enumeration(t, q));
  }
}

TEST_CASE("dtw handles long sequences of unequal length") {
  std::mt19937_64 rng(5);
  const auto t = random_points(rng, 70);
  const auto q = random_points(rng, 45);
  const double d = dtw(t, q);
  CHECK(d == dtw(q, t));
  CHECK(d > 0.0);
  // Every path visits both endpoints pairs, so the cost is at least their sum.
  CHECK(d >= euclidean(t.front(), q.front()) + euclidean(t.back(), q.back()) - 1e-9);
}

TEST_CASE("dtw is symmetric") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = random_points(rng, 1 + rng() % 12);
    const auto q = random_points(rng, 1 + rng() % 12);
    CHECK(dtw(t, q) == doctest::Approx(dtw(q, t)).epsilon(1e-12));
  }
}

TEST_CASE("path length examples") {
  CHECK(path_length(std::vector<GeoPoint>{{0, 0}, {1, 0}, {2, 0}}) == 2.0);
  CHECK(path_length(std::vector<GeoPoint>{{1, 1}, {1, 1}, {1, 1}}) == 0.0);
  CHECK(path_length(std::vector<GeoPoint>{{0, 0}, {3, 4}, {3, 6}}) == 7.0);
  CHECK(path_length(std::vector<GeoPoint>{{5, 5}}) == 0.0);
}

TEST_CASE("ndtw examples") {
  const std::vector<GeoPoint> t{{0, 0}, {1, 0}, {2, 0}};
  CHECK(ndtw(t, t) == 0.0);
  const std::vector<GeoPoint> a{{0, 0}, {1, 0}};
  const std::vector<GeoPoint> b{{0, 1}, {1, 1}};
  CHECK(ndtw(a, b) == 2.0);
  const std::vector<GeoPoint> a3{{0, 0}, {3, 0}};
  const std::vector<GeoPoint> b3{{0, 3}, {3, 3}};
  CHECK(ndtw(a3, b3) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("ndtw of a stationary window is infinite") {
  const std::vector<GeoPoint> still{{1, 1}, {1, 1}, {1, 1}};
  const std::vector<GeoPoint> moving{{0, 0}, {1, 0}, {2, 0}};
  CHECK(ndtw(still, moving) == std::numeric_limits<double>::infinity());
  CHECK(ndtw(moving, still) == std::numeric_limits<double>::infinity());
  CHECK(ndtw(still, still) == std::numeric_limits<double>::infinity());
}

TEST_CASE("ndtw_prepared agrees with ndtw") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = random_points(rng, 6);
    const auto q = random_points(rng, 6);
    const double pt = std::sqrt(path_length(t));
    const double pq = std::sqrt(path_length(q));
    CHECK(ndtw_prepared(t, pt, q, pq) == ndtw(t, q));
  }
}

TEST_CASE("ndtw is invariant under similarity transforms") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> scale(0.1, 20.0);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> shift(-1000.0, 1000.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = random_points(rng, 2 + rng() % 8);
    const auto q = random_points(rng, 2 + rng() % 8);
    const double c = scale(rng);
    const double a = angle(rng);
    const GeoPoint b{shift(rng), shift(rng)};
    const double before = ndtw(t, q);
    const double after = ndtw(transform(t, c, a, b), transform(q, c, a, b));
    CHECK(after == doctest::Approx(before).epsilon(1e-9));
  }
}

TEST_CASE("ndtw matches the enumeration oracle") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = random_points(rng, 2 + rng() % 3);
    const auto q = random_points(rng, 2 + rng() % 3);
    CHECK(ndtw(t, q) == doctest::Approx(oracle::ndtw_by_enumeration(t, q)).epsilon(1e-12));
  }
}

TEST_CASE("bounded ndtw is exact within the bound") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> frac(0.0, 2.0);
  int abandoned = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto t = random_points(rng, 6);
    const auto q = random_points(rng, 6);
    const double st = std::sqrt(path_length(t));
    const double sq = std::sqrt(path_length(q));
    const double exact = ndtw_prepared(t, st, q, sq);
    const double bound = exact * frac(rng);
    const double got = ndtw_bounded(t, st, q, sq, bound);
    if (exact <= bound) {
      CHECK(got == exact);
    } else {
      CHECK(got > bound);
      if (got != exact) {
        CHECK(got == std::numeric_limits<double>::infinity());
        ++abandoned;
      }
    }
    CHECK(ndtw_bounded(t, st, q, sq, exact) == exact);
    CHECK(ndtw_bounded(t, st, q, sq, std::numeric_limits<double>::infinity()) == exact);
  }
  CHECK(abandoned > 0);
}

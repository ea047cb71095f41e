#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "obsdet/density.hpp"
#include "obsdet/similarity.hpp"
#include "support.hpp"

using namespace obsdet;

namespace {
std::vector<Neighbor> at_distances(std::initializer_list<double> ds) {
  std::vector<Neighbor> out;
  WindowId id = 0;
  for (double d : ds) out.push_back({id++, d});
  return out;
}

Trajectory straight(const std::string& id, double y, double dx_per_step, std::size_t n,
                    double turn_after = -1.0) {
  Trajectory t{id, {}};
  GeoPoint p{0.0, y};
  for (std::size_t i = 0; i < n; ++i) {
    t.points.push_back(p);
    if (turn_after >= 0.0 && static_cast<double>(i) >= turn_after) {
      p.y += dx_per_step;
    } else {
      p.x += dx_per_step;
    }
  }
  return t;
}
}  // namespace

TEST_CASE("gaussian kernel") {
  CHECK(gaussian_kernel(0.0, 1.0) == 1.0);
  CHECK(gaussian_kernel(1.0, 1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(gaussian_kernel(std::numeric_limits<double>::infinity(), 1.0) == 0.0);
  CHECK(gaussian_kernel(2.0, 2.0) == gaussian_kernel(1.0, 1.0));
}

TEST_CASE("density examples") {
  const DensityParams p;
  CHECK(density(at_distances({0.0}), p, 10) == 1.0);
  CHECK(density(at_distances({0, 0, 0, 0, 0, 0, 0, 0}), p, 10) == 8.0);
  CHECK(density(at_distances({0.1, 0.2, 0.3}), p, 10) == doctest::Approx(2.9312).epsilon(1e-4));
  CHECK(density(at_distances({0.5, 1.0}), p, 10) == doctest::Approx(1.4890).epsilon(1e-4));
  CHECK(density({}, p, 10) == 0.0);
}

TEST_CASE("density matches the scalar oracle") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(0.0, 4.0);
  std::uniform_real_distribution<double> s(0.1, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Neighbor> ns;
    std::vector<double> raw;
    const std::size_t k = 1 + rng() % 16;
    for (std::size_t i = 0; i < k; ++i) {
      raw.push_back(d(rng));
      ns.push_back({static_cast<WindowId>(i), raw.back()});
    }
    const DensityParams p{s(rng)};
    const double got = density(ns, p, 100);
    CHECK(std::abs(got - oracle::kernel_sum(raw, p.sigma)) <= 1e-12);
    CHECK(got >= 0.0);
    CHECK(got <= static_cast<double>(k));
  }
}

TEST_CASE("literal normalization divides by the trajectory count") {
  DensityParams p;
  p.normalization = DensityNormalization::paper_literal;
  CHECK(density(at_distances({0.0, 0.0}), p, 4) == 0.5);
  CHECK(density(at_distances({0.0}), p, 0) == 0.0);
}

TEST_CASE("density grows with the bandwidth") {
  const auto ns = at_distances({0.3, 0.7, 1.5, 2.0});
  double previous = 0.0;
  for (double sigma : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double f = density(ns, DensityParams{sigma}, 10);
    CHECK(f > previous);
    previous = f;
  }
}

TEST_CASE("density parameters are validated") {
  CHECK_THROWS_AS(DensityParams{0.0}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(DensityParams{-1.0}.validate(), std::invalid_argument);
  CHECK_NOTHROW(DensityParams{0.5}.validate());
}

TEST_CASE("succeed density penalizes divergent continuations") {
  // t and its neighbors travel east in lockstep; a diverging neighbor turns north.
  std::vector<Trajectory> ts{straight("t", 0.0, 1.0, 8), straight("same", 0.05, 1.0, 8),
                             straight("turn", -0.05, 1.0, 8, 5.0)};
  const PartitionedCorpus corpus(ts, PartitionParams{6, 1});
  const WindowId t = 0;
  std::vector<Neighbor> ns;
  for (ParentId p : {1u, 2u}) {
    const WindowId w = corpus.first_window(p);
    ns.push_back({w, ndtw(corpus.window(t).points, corpus.window(w).points)});
  }
  const DensityParams params;
  const double f = density(ns, params, 3);
  const double fs = succ_density(corpus, t, corpus, ns, params, 3);
  CHECK(fs <= f);
  CHECK(fs < f - 1e-3);

  SUBCASE("continuation distances are clamped below by the window distances") {
    double expected = 0.0;
    for (const Neighbor& n : ns) {
      const double ds = ndtw(corpus.window(1).points, corpus.window(n.id + 1).points);
      expected += gaussian_kernel(std::max(n.distance, ds), 1.0);
    }
    CHECK(fs == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("neighbors without a succeed contribute nothing") {
    const std::vector<Neighbor> last{{corpus.first_window(1) + 2, 0.0}};
    CHECK_FALSE(corpus.succ(last[0].id).has_value());
    CHECK(succ_density(corpus, t, corpus, last, params, 3) == 0.0);
  }
  SUBCASE("a window without a succeed is a caller error") {
    CHECK_THROWS_AS(succ_density(corpus, 2, corpus, ns, params, 3), std::logic_error);
  }
}

TEST_CASE("succeed density of aligned copies equals density") {
  const Trajectory base = straight("a", 0.0, 1.0, 9, 6.0);
  Trajectory copy = base;
  copy.id = "b";
  const PartitionedCorpus corpus({base, copy}, PartitionParams{6, 1});
  const std::vector<Neighbor> ns{{corpus.first_window(1), 0.0}};
  CHECK(density(ns, DensityParams{}, 2) == 1.0);
  CHECK(succ_density(corpus, 0, corpus, ns, DensityParams{}, 2) == 1.0);
}

TEST_CASE("a far continuation is penalized") {
  // A neighbor at distance 0.2 whose continuation lies 1.5 away.
  const double kept = gaussian_kernel(std::max(0.2, 1.5), 1.0);
  CHECK(kept == doctest::Approx(0.3247).epsilon(1e-4));
  CHECK(gaussian_kernel(0.2, 1.0) == doctest::Approx(0.9802).epsilon(1e-4));
  CHECK(kept < gaussian_kernel(0.2, 1.0));
}

TEST_CASE("succeed density never exceeds density on random profiles") {
  const auto ts = testing_support::random_trajectories(33, 30, 12);
  const PartitionedCorpus corpus(ts, PartitionParams{6, 1});
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 2000; ++trial) {
    WindowId t;
    do {
      t = static_cast<WindowId>(rng() % corpus.window_count());
    } while (!corpus.succ(t));
    std::vector<Neighbor> ns;
    const std::size_t k = 1 + rng() % 8;
    for (std::size_t i = 0; i < k; ++i) {
      const WindowId w = static_cast<WindowId>(rng() % corpus.window_count());
      ns.push_back({w, ndtw(corpus.window(t).points, corpus.window(w).points)});
    }
    const DensityParams p{0.2 + 0.1 * static_cast<double>(rng() % 20)};
    const double f = density(ns, p, corpus.trajectory_count());
    const double fs = succ_density(corpus, t, corpus, ns, p, corpus.trajectory_count());
    CHECK(fs <= f);
    CHECK(fs >= 0.0);
  }
}

TEST_CASE("profile ratios") {
  const DensityProfile a = make_profile(4.0, 3.6, 2.0, 0.6);
  CHECK(a.supported);
  CHECK(a.p1 == doctest::Approx(0.9));
  CHECK(a.p2 == doctest::Approx(0.3));
  CHECK(a.p_pooled == doctest::Approx(0.7));

  const DensityProfile same = make_profile(3.0, 1.5, 3.0, 1.5);
  CHECK(same.p1 == same.p2);
  CHECK(same.p_pooled == same.p1);

  CHECK_FALSE(make_profile(0.0, 0.0, 2.0, 1.0).supported);
  CHECK_FALSE(make_profile(2.0, 1.0, 0.0, 0.0).supported);
}

TEST_CASE("toy corpus profile separates reference and query behavior") {
  // Reference travels straight through; queries turn away after the same prefix.
  std::vector<Trajectory> ref;
  std::vector<Trajectory> qry;
  for (int i = 0; i < 6; ++i) {
    ref.push_back(straight("r" + std::to_string(i), 0.02 * i, 1.0, 10));
    qry.push_back(straight("q" + std::to_string(i), 0.02 * i + 0.01, 1.0, 10, 5.0));
  }
  const PartitionParams pp{6, 1};
  const auto ri = CorpusIndex::build(ref, pp, {}, CorpusKind::reference, true);
  const auto qi = CorpusIndex::build(qry, pp, {}, CorpusKind::query, false);
  const DensityProfile prof = density_profile(0, ri, qi, DensityParams{}, 8);
  CHECK(prof.supported);
  CHECK(prof.p1 > prof.p2);

  ProfileOptions scan;
  scan.mode = SearchMode::exact;
  scan.use_precomputed_reference = false;
  const DensityProfile exact = density_profile(0, ri, qi, DensityParams{}, 8, scan);
  CHECK(exact.f_ref == doctest::Approx(prof.f_ref).epsilon(1e-12));
  CHECK(exact.p2 == doctest::Approx(prof.p2).epsilon(1e-12));
}

TEST_CASE("identical corpora never favor the reference") {
  const auto ts = testing_support::random_trajectories(35, 20, 12);
  const PartitionParams pp{6, 1};
  const auto ri = CorpusIndex::build(ts, pp, {}, CorpusKind::reference, true);
  const auto qi = CorpusIndex::build(ts, pp, {}, CorpusKind::query, false);
  for (WindowId t = 0; t < ri.corpus().window_count(); ++t) {
    if (!ri.corpus().succ(t)) continue;
    const DensityProfile p = density_profile(t, ri, qi, DensityParams{}, 8);
    CHECK(p.p2 >= p.p1 - 1e-12);
  }
}

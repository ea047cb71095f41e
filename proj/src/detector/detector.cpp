#include "obsdet/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "obsdet/geometry.hpp"

namespace obsdet {

void DetectParams::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  density.validate();
}

double score(const DensityProfile& profile, ZMode mode) {
  if (!profile.supported) throw std::logic_error("score of an unsupported profile");
  const double numerator = profile.p1 - profile.p2;
  if (numerator == 0.0) return 0.0;
  const double spread = profile.p_pooled * (1.0 - profile.p_pooled);
  const double inv_ref = 1.0 / profile.f_ref;
  const double inv_qry = 1.0 / profile.f_qry;
  const double radicand = spread * (mode == ZMode::paper ? inv_ref - inv_qry : inv_ref + inv_qry);
  if (!(spread > 0.0) || !(radicand > 0.0)) return -std::numeric_limits<double>::infinity();
  return numerator / std::sqrt(radicand);
}

bool is_candidate(double z, const DensityProfile& profile, const DetectParams& params) {
  return profile.supported && z > params.tau && profile.f_ref > params.delta &&
         profile.f_qry > params.delta;
}

Obstacle build_obstacle(const PartitionedCorpus& reference, std::vector<WindowId> candidates) {
  if (candidates.empty()) throw std::invalid_argument("obstacle needs at least one candidate");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  Obstacle o;
  GeoPoint heading;
  for (WindowId id : candidates) {
    const SubTrajectory sub = reference.window(id);
    o.points.push_back(sub.last_point());
    const GeoPoint seg = sub.points[sub.size() - 1] - sub.points[sub.size() - 2];
    const double len = norm(seg);
    if (len > 0.0) heading = heading + (1.0 / len) * seg;
  }
  const double hlen = norm(heading);
  o.mean_heading = hlen > 0.0 ? (1.0 / hlen) * heading : GeoPoint{};
  o.hull = convex_hull(o.points);
  o.candidates = std::move(candidates);
  return o;
}

std::vector<WindowId> DetectionResult::candidate_union() const {
  std::vector<WindowId> all;
  for (const Obstacle& o : obstacles) all.insert(all.end(), o.candidates.begin(), o.candidates.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

Detector::Detector(const CorpusIndex& reference, const CorpusIndex& query, DetectParams params)
    : ref_(reference), qry_(query), params_(params) {
  params_.validate();
  if (!(reference.corpus().params() == query.corpus().params())) {
    throw std::invalid_argument("reference and query indexes use different partitions");
  }
  flags_.assign(query.corpus().window_count(), 0);
  verdicts_.assign(reference.corpus().window_count(), kUnknown);
}

bool Detector::evaluate(WindowId t) {
  if (!ref_.is_indexed(t) || !ref_.corpus().succ(t)) return false;
  ++stats_.candidates_tested;
  ProfileOptions options;
  options.mode = params_.search;
  options.use_precomputed_reference = params_.optimizations.precomputed_reference;
  const DensityProfile profile =
      density_profile(t, ref_, qry_, params_.density, params_.k, options, &search_stats_);
  if (!profile.supported) return false;
  return is_candidate(score(profile, params_.z_mode), profile, params_);
}

bool Detector::copy_close_verdict(WindowId t) {
  if (!ref_.has_distinct_table()) return false;
  for (const Neighbor& n : ref_.distinct_table()[t]) {
    if (!(n.distance < params_.epsilon)) break;
    if (verdicts_[n.id] != kUnknown) {
      verdicts_[t] = verdicts_[n.id];
      ++stats_.skips_taken;
      return true;
    }
  }
  return false;
}

std::pair<bool, bool> Detector::decide(WindowId t) {
  const Optimizations& opt = params_.optimizations;
  if (opt.reference_bitmap && verdicts_[t] != kUnknown) {
    ++stats_.cache_hits;
    return {verdicts_[t] == kAccept, false};
  }
  if (!(opt.skip_close_references && params_.epsilon > 0.0 && copy_close_verdict(t))) {
    verdicts_[t] = evaluate(t) ? kAccept : kReject;
  }
  return {verdicts_[t] == kAccept, verdicts_[t] == kAccept};
}

std::vector<WindowId> Detector::find_candidates(WindowId q) {
  std::vector<WindowId> found;
  if (flags_[q] != 0) return found;
  const PartitionedCorpus& qc = qry_.corpus();

  struct Frame {
    WindowId window;
    double distance_to_parent;
  };
  std::vector<Frame> stack{{q, std::numeric_limits<double>::infinity()}};
  const bool skip_queries = params_.optimizations.skip_close_queries && params_.epsilon > 0.0;
  while (!stack.empty()) {
    const Frame frame = stack.back();
    stack.pop_back();
    if (flags_[frame.window] != 0) continue;
    flags_[frame.window] = 1;
    if (skip_queries && frame.distance_to_parent < params_.epsilon) {
      ++stats_.skips_taken;
      continue;
    }
    ++stats_.queries_checked;

    const QueryWindow as_q = as_query(qc, frame.window);
    const auto ref_neighbors = ref_.search(params_.search, false, as_q, params_.k, &search_stats_);
    bool any_accepted = false;
    for (const Neighbor& t : ref_neighbors) {
      const auto [accepted, fresh] = decide(t.id);
      if (!accepted) continue;
      any_accepted = true;
      if (fresh || !params_.optimizations.reference_bitmap) found.push_back(t.id);
    }
    if (!any_accepted) continue;

    QueryWindow self = as_q;
    self.exclude_window = frame.window;
    const auto close = qry_.search(params_.search, false, self, params_.k, &search_stats_);
    // reversed so the nearest neighbor is expanded first
    for (auto it = close.rbegin(); it != close.rend(); ++it) {
      if (flags_[it->id] == 0) stack.push_back({it->id, it->distance});
    }
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return found;
}

DetectionResult Detector::run() {
  DetectionResult result;
  const PartitionedCorpus& qc = qry_.corpus();
  for (WindowId q = 0; q < qc.window_count(); ++q) {
    if (flags_[q] != 0 || !qry_.is_indexed(q)) continue;
    std::vector<WindowId> candidates = find_candidates(q);
    if (!candidates.empty()) {
      result.obstacles.push_back(build_obstacle(ref_.corpus(), std::move(candidates)));
    }
  }
  stats_.distance_evaluations = search_stats_.distance_evaluations;
  result.stats = stats_;
  return result;
}

DetectionResult detect(const CorpusIndex& reference, const CorpusIndex& query,
                       const DetectParams& params) {
  return Detector(reference, query, params).run();
}

}  // namespace obsdet

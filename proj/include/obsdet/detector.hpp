#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "obsdet/density.hpp"
#include "obsdet/geo_point.hpp"
#include "obsdet/knn_index.hpp"

namespace obsdet {

/// Denominator of the z-statistic: `paper` takes the difference of the
/// inverse densities, `pooled` adds them (standard two-proportion test).
enum class ZMode : std::uint8_t { paper, pooled };

/// The four search shortcuts. All on by default.
struct Optimizations {
  bool precomputed_reference = true;  // read reference distinct lists from the index table
  bool reference_bitmap = true;       // decide each reference window once
  bool skip_close_queries = true;     // flag q_i without expanding when nDTW(q_i, q) < epsilon
  bool skip_close_references = true;  // copy the verdict of a decided neighbor within epsilon

  static Optimizations all_on() { return {}; }
  static Optimizations all_off() { return {false, false, false, false}; }
};

struct DetectParams {
  double tau = 1.645;
  double delta = 1.0;
  std::size_t k = 8;
  double epsilon = 0.0;
  ZMode z_mode = ZMode::pooled;
  Optimizations optimizations;
  DensityParams density;
  SearchMode search = SearchMode::graph;

  void validate() const;
};

/// One-sided z-value comparing p1 and p2. Total: returns -infinity when the
/// variance term is not positive. Throws std::logic_error on an unsupported profile.
double score(const DensityProfile& profile, ZMode mode);

/// score > tau and both densities > delta (all strict).
bool is_candidate(double z, const DensityProfile& profile, const DetectParams& params);

struct Obstacle {
  std::vector<WindowId> candidates;  // reference windows, ascending
  std::vector<GeoPoint> points;      // their last points
  std::vector<GeoPoint> hull;        // convex hull of `points`, counter-clockwise
  GeoPoint mean_heading;             // unit vector, zero if undefined
};

/// Collects last points, hull and mean final-segment heading of a non-empty candidate set.
Obstacle build_obstacle(const PartitionedCorpus& reference, std::vector<WindowId> candidates);

struct DetectionStats {
  std::uint64_t queries_checked = 0;
  std::uint64_t candidates_tested = 0;  // full profile evaluations
  std::uint64_t cache_hits = 0;
  std::uint64_t skips_taken = 0;
  std::uint64_t distance_evaluations = 0;
};

struct DetectionResult {
  std::vector<Obstacle> obstacles;
  DetectionStats stats;

  /// Sorted union of candidate windows over all obstacles.
  std::vector<WindowId> candidate_union() const;
};

/// Depth-first obstacle search over a reference and a query index built
/// with the same partition parameters.
class Detector {
 public:
  /// Throws std::invalid_argument on bad parameters or mismatched partitions.
  Detector(const CorpusIndex& reference, const CorpusIndex& query, DetectParams params);

  /// Candidates reachable from query window `q`; flags every visited query
  /// window. Returns an empty set if `q` is already flagged.
  std::vector<WindowId> find_candidates(WindowId q);

  /// Visits every unflagged query window in id order; one obstacle per
  /// non-empty candidate set.
  DetectionResult run();

  bool flagged(WindowId q) const { return flags_[q] != 0; }
  const DetectionStats& stats() const { return stats_; }

  /// Full evaluation of one reference window, bypassing every cache.
  bool evaluate(WindowId t);

 private:
  enum Verdict : std::int8_t { kUnknown = -1, kReject = 0, kAccept = 1 };

  /// Returns the verdict for t and whether t is newly accepted by this call.
  std::pair<bool, bool> decide(WindowId t);
  bool copy_close_verdict(WindowId t);

  const CorpusIndex& ref_;
  const CorpusIndex& qry_;
  DetectParams params_;
  std::vector<std::uint8_t> flags_;
  std::vector<Verdict> verdicts_;
  DetectionStats stats_;
  SearchStats search_stats_;
};

/// Runs a fresh Detector.
DetectionResult detect(const CorpusIndex& reference, const CorpusIndex& query,
                       const DetectParams& params);

}  // namespace obsdet

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "obsdet/trajectory.hpp"

namespace obsdet {

enum class CorpusKind : std::uint8_t { reference = 0, query = 1 };

/// How neighbor lists are produced: through the navigable graph or by linear scan.
enum class SearchMode : std::uint8_t { graph = 0, exact = 1 };

struct IndexParams {
  std::size_t k = 8;
  std::size_t max_degree = 16;  // M; level 0 allows 2M
  std::size_t ef_construction = 200;
  std::size_t ef_search = 64;
  std::uint64_t seed = 42;
  /// Beam width of distinct-parent search, counted in parents. Each parent
  /// brings a run of near-identical overlapping windows, so fewer suffice.
  std::size_t ef_distinct = 16;

  void validate() const;
  friend bool operator==(const IndexParams&, const IndexParams&) = default;
};

struct Neighbor {
  WindowId id = kNoWindow;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Strict (distance, id) order. Window ids are grouped by parent and ordered
/// by index_in_parent, so this is the (distance, parent, index) tie-break.
inline bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

/// A query window that may come from any corpus.
struct QueryWindow {
  std::span<const GeoPoint> points;
  double sqrt_length = 0.0;
  /// Parent in the searched corpus whose windows are not admitted (self-support).
  std::optional<ParentId> exclude_parent;
  /// A single window of the searched corpus not admitted (the query itself).
  WindowId exclude_window = kNoWindow;
};

/// Builds a QueryWindow for `id` of `corpus` with no exclusions.
QueryWindow as_query(const PartitionedCorpus& corpus, WindowId id);
/// Builds a QueryWindow from free-standing points.
QueryWindow as_query(std::span<const GeoPoint> points);

struct SearchStats {
  std::uint64_t distance_evaluations = 0;
};

/// Per-window neighbor lists in CSR layout.
struct NeighborTable {
  std::size_t k = 0;
  SearchMode mode = SearchMode::graph;
  std::vector<std::uint32_t> offsets;  // window_count + 1 entries
  std::vector<Neighbor> entries;

  bool empty() const { return offsets.empty(); }
  std::span<const Neighbor> operator[](WindowId id) const {
    return std::span<const Neighbor>(entries).subspan(offsets[id], offsets[id + 1] - offsets[id]);
  }
  friend bool operator==(const NeighborTable&, const NeighborTable&) = default;
};

/// Projection origin carried alongside a persisted corpus.
struct ProjectionOrigin {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const ProjectionOrigin&, const ProjectionOrigin&) = default;
};

/// Layered navigable small-world graph over the non-stationary windows of a
/// corpus, searched under nDTW. Immutable once built (apart from the optional
/// distinct-neighbor table) and safe for concurrent reads.
class CorpusIndex {
 public:
  CorpusIndex() = default;

  /// Partitions, inserts every non-stationary window in id order, and when
  /// `precompute_distinct` is set fills the distinct-neighbor table.
  /// Throws std::invalid_argument if no trajectory yields an indexable window.
  static CorpusIndex build(std::vector<Trajectory> trajectories, const PartitionParams& partition,
                           const IndexParams& params, CorpusKind kind, bool precompute_distinct,
                           SearchMode precompute_mode = SearchMode::graph);

  const PartitionedCorpus& corpus() const { return corpus_; }
  const IndexParams& params() const { return params_; }
  CorpusKind kind() const { return kind_; }
  std::size_t trajectory_count() const { return corpus_.partitioned_trajectory_count(); }
  std::size_t indexed_count() const { return indexed_count_; }
  bool is_indexed(WindowId id) const { return levels_[id] >= 0; }

  WindowId entry_point() const { return entry_; }
  int max_level() const { return max_level_; }
  int level(WindowId id) const { return levels_[id]; }
  std::span<const WindowId> links(WindowId id, int level) const;

  /// Approximate k nearest windows, ascending by (distance, id).
  std::vector<Neighbor> knn(const QueryWindow& q, std::size_t k, SearchStats* stats = nullptr) const;
  /// Approximate k nearest windows with pairwise-distinct parents; the
  /// nearest window of each admitted parent represents it.
  std::vector<Neighbor> distinct_knn(const QueryWindow& q, std::size_t k,
                                     SearchStats* stats = nullptr) const;
  /// Linear-scan oracles with the same contracts.
  std::vector<Neighbor> exact_knn(const QueryWindow& q, std::size_t k,
                                  SearchStats* stats = nullptr) const;
  std::vector<Neighbor> exact_distinct_knn(const QueryWindow& q, std::size_t k,
                                           SearchStats* stats = nullptr) const;

  std::vector<Neighbor> search(SearchMode mode, bool distinct, const QueryWindow& q, std::size_t k,
                               SearchStats* stats = nullptr) const;

  /// Distinct-parent neighbor list of every indexed window, excluding the
  /// window's own parent. Computed in parallel.
  void precompute_distinct(SearchMode mode);
  const NeighborTable& distinct_table() const { return distinct_; }
  bool has_distinct_table() const { return !distinct_.empty(); }

  const std::optional<ProjectionOrigin>& origin() const { return origin_; }
  void set_origin(ProjectionOrigin origin) { origin_ = origin; }

  /// Versioned binary image. save(load(bytes)) reproduces bytes exactly.
  void save(std::ostream& out) const;
  static CorpusIndex load(std::istream& in);
  void save_file(const std::string& path) const;
  static CorpusIndex load_file(const std::string& path);

  /// nDTW between a query window and an indexed window.
  double distance(const QueryWindow& q, WindowId id) const;
  /// distance(), or +infinity as soon as it provably exceeds `bound`.
  double distance_within(const QueryWindow& q, WindowId id, double bound) const;

 private:
  void insert(WindowId id, int level);
  int draw_level(std::uint64_t& state) const;

  PartitionedCorpus corpus_;
  IndexParams params_;
  CorpusKind kind_ = CorpusKind::reference;
  std::size_t indexed_count_ = 0;
  std::vector<int> levels_;
  // links_[id][level] for level in [0, levels_[id]]
  std::vector<std::vector<std::vector<WindowId>>> links_;
  WindowId entry_ = kNoWindow;
  int max_level_ = -1;
  NeighborTable distinct_;
  std::optional<ProjectionOrigin> origin_;

  friend class GraphSearcher;
};

}  // namespace obsdet

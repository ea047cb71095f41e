#include "obsdet/knn_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "obsdet/kernels.hpp"
#include "obsdet/similarity.hpp"

namespace obsdet {
namespace {

// Epoch-tagged visited marks, one buffer per thread.
constexpr double kInf = std::numeric_limits<double>::infinity();

class VisitedSet {
 public:
  void reset(std::size_t n) {
    if (tags_.size() < n) tags_.resize(n, 0);
    if (++epoch_ == 0) {
      std::fill(tags_.begin(), tags_.end(), 0);
      epoch_ = 1;
    }
  }
  bool test_and_set(WindowId id) {
    if (tags_[id] == epoch_) return true;
    tags_[id] = epoch_;
    return false;
  }

 private:
  std::vector<std::uint32_t> tags_;
  std::uint32_t epoch_ = 0;
};

VisitedSet& thread_visited() {
  thread_local VisitedSet visited;
  return visited;
}

struct FartherFirst {
  bool operator()(const Neighbor& a, const Neighbor& b) const { return closer(a, b); }
};
struct CloserFirst {
  bool operator()(const Neighbor& a, const Neighbor& b) const { return closer(b, a); }
};
using MaxHeap = std::priority_queue<Neighbor, std::vector<Neighbor>, FartherFirst>;
using MinHeap = std::priority_queue<Neighbor, std::vector<Neighbor>, CloserFirst>;

struct NeighborLess {
  bool operator()(const Neighbor& a, const Neighbor& b) const { return closer(a, b); }
};

}  // namespace

void IndexParams::validate() const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (max_degree < 2) throw std::invalid_argument("max_degree (M) must be >= 2");
  if (ef_search < k) throw std::invalid_argument("ef_search must be >= k");
  if (ef_distinct < k) throw std::invalid_argument("ef_distinct must be >= k");
  if (ef_construction < 1) throw std::invalid_argument("ef_construction must be >= 1");
}

QueryWindow as_query(const PartitionedCorpus& corpus, WindowId id) {
  return {corpus.window(id).points, corpus.sqrt_path_length(id), std::nullopt, kNoWindow};
}

QueryWindow as_query(std::span<const GeoPoint> points) {
  return {points, std::sqrt(path_length(points)), std::nullopt, kNoWindow};
}

/// Beam searches over one level of the graph.
class GraphSearcher {
 public:
  GraphSearcher(const CorpusIndex& index, const QueryWindow& q, SearchStats* stats)
      : index_(index), q_(q), stats_(stats) {}

  double dist(WindowId id) {
    if (stats_ != nullptr) ++stats_->distance_evaluations;
    return index_.distance(q_, id);
  }

  // Exact when <= bound; candidates beyond it are only ever rejected.
  double dist(WindowId id, double bound) {
    if (stats_ != nullptr) ++stats_->distance_evaluations;
    return index_.distance_within(q_, id, bound);
  }

  bool admissible(WindowId id) const {
    if (id == q_.exclude_window) return false;
    if (q_.exclude_parent && index_.corpus_.parent_of(id) == *q_.exclude_parent) return false;
    return true;
  }

  // Greedy descent through the upper levels down to (and excluding) `stop_level`.
  Neighbor descend(int stop_level) {
    Neighbor best{index_.entry_, dist(index_.entry_)};
    for (int level = index_.max_level_; level > stop_level; --level) {
      bool changed = true;
      while (changed) {
        changed = false;
        for (WindowId nb : index_.links_[best.id][level]) {
          Neighbor cand{nb, dist(nb, best.distance)};
          if (closer(cand, best)) {
            best = cand;
            changed = true;
          }
        }
      }
    }
    return best;
  }

  // Plain beam search; all nodes are traversable, exclusions are applied by the caller.
  std::vector<Neighbor> layer(const std::vector<Neighbor>& entries, std::size_t ef, int level) {
    VisitedSet& visited = thread_visited();
    visited.reset(index_.corpus_.window_count());
    MinHeap frontier;
    MaxHeap results;
    for (const Neighbor& e : entries) {
      if (visited.test_and_set(e.id)) continue;
      frontier.push(e);
      results.push(e);
      if (results.size() > ef) results.pop();
    }
    while (!frontier.empty()) {
      const Neighbor c = frontier.top();
      if (results.size() >= ef && closer(results.top(), c)) break;
      frontier.pop();
      for (WindowId nb : index_.links_[c.id][level]) {
        if (visited.test_and_set(nb)) continue;
        Neighbor n{nb, dist(nb, results.size() < ef ? kInf : results.top().distance)};
        if (results.size() < ef || closer(n, results.top())) {
          frontier.push(n);
          results.push(n);
          if (results.size() > ef) results.pop();
        }
      }
    }
    std::vector<Neighbor> out;
    out.reserve(results.size());
    while (!results.empty()) {
      out.push_back(results.top());
      results.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  // Level-0 beam search whose result set admits at most one window per
  // parent. Every window stays traversable so the beam can move through
  // runs of same-parent windows.
  std::vector<Neighbor> distinct_layer(const Neighbor& entry, std::size_t ef) {
    const PartitionedCorpus& corpus = index_.corpus_;
    VisitedSet& visited = thread_visited();
    visited.reset(corpus.window_count());
    MinHeap frontier;
    std::set<Neighbor, NeighborLess> results;
    std::unordered_map<ParentId, Neighbor> best_of_parent;

    auto admit = [&](const Neighbor& n) {
      if (!admissible(n.id)) return;
      const ParentId p = corpus.parent_of(n.id);
      auto it = best_of_parent.find(p);
      if (it != best_of_parent.end()) {
        if (!closer(n, it->second)) return;
        results.erase(it->second);
        it->second = n;
        results.insert(n);
        return;
      }
      if (results.size() >= ef && !closer(n, *results.rbegin())) return;
      results.insert(n);
      best_of_parent.emplace(p, n);
      if (results.size() > ef) {
        const Neighbor worst = *results.rbegin();
        results.erase(std::prev(results.end()));
        best_of_parent.erase(corpus.parent_of(worst.id));
      }
    };

    visited.test_and_set(entry.id);
    frontier.push(entry);
    admit(entry);
    while (!frontier.empty()) {
      const Neighbor c = frontier.top();
      if (results.size() >= ef && closer(*results.rbegin(), c)) break;
      frontier.pop();
      for (WindowId nb : index_.links_[c.id][0]) {
        if (visited.test_and_set(nb)) continue;
        Neighbor n{nb, dist(nb, results.size() < ef ? kInf : results.rbegin()->distance)};
        if (results.size() < ef || closer(n, *results.rbegin())) {
          frontier.push(n);
          admit(n);
        }
      }
    }
    return {results.begin(), results.end()};
  }

 private:
  const CorpusIndex& index_;
  const QueryWindow& q_;
  SearchStats* stats_;
};

double CorpusIndex::distance(const QueryWindow& q, WindowId id) const {
  return ndtw_prepared(q.points, q.sqrt_length, corpus_.window(id).points,
                       corpus_.sqrt_path_length(id));
}

double CorpusIndex::distance_within(const QueryWindow& q, WindowId id, double bound) const {
  return ndtw_bounded(q.points, q.sqrt_length, corpus_.window(id).points,
                      corpus_.sqrt_path_length(id), bound);
}

std::span<const WindowId> CorpusIndex::links(WindowId id, int level) const {
  if (level < 0 || level > levels_[id]) return {};
  return links_[id][level];
}

int CorpusIndex::draw_level(std::uint64_t& state) const {
  // splitmix64 keeps the level sequence identical across standard libraries
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  const double u = (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  const double ml = 1.0 / std::log(static_cast<double>(params_.max_degree));
  return static_cast<int>(std::floor(-std::log(u) * ml));
}

namespace {

// Keeps candidates that are closer to the base than to every already kept
// neighbor (the diversity heuristic), up to `limit`.
std::vector<WindowId> select_diverse(const CorpusIndex& index, std::vector<Neighbor> candidates,
                                     std::size_t limit) {
  std::sort(candidates.begin(), candidates.end(), closer);
  std::vector<WindowId> kept;
  kept.reserve(limit);
  for (const Neighbor& c : candidates) {
    if (kept.size() >= limit) break;
    const QueryWindow cq = as_query(index.corpus(), c.id);
    bool diverse = true;
    for (WindowId r : kept) {
      if (index.distance_within(cq, r, c.distance) < c.distance) {
        diverse = false;
        break;
      }
    }
    if (diverse) kept.push_back(c.id);
  }
  return kept;
}

}  // namespace

void CorpusIndex::insert(WindowId id, int level) {
  levels_[id] = level;
  links_[id].assign(static_cast<std::size_t>(level) + 1, {});
  ++indexed_count_;
  if (entry_ == kNoWindow) {
    entry_ = id;
    max_level_ = level;
    return;
  }
  const QueryWindow q = as_query(corpus_, id);
  GraphSearcher searcher(*this, q, nullptr);
  std::vector<Neighbor> entries{searcher.descend(level)};
  for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
    std::vector<Neighbor> found = searcher.layer(entries, params_.ef_construction, lc);
    const std::size_t cap = lc == 0 ? 2 * params_.max_degree : params_.max_degree;
    std::vector<WindowId> chosen = select_diverse(*this, found, params_.max_degree);
    links_[id][lc] = chosen;
    for (WindowId nb : chosen) {
      auto& adj = links_[nb][lc];
      adj.push_back(id);
      if (adj.size() > cap) {
        const QueryWindow nq = as_query(corpus_, nb);
        std::vector<Neighbor> pool;
        pool.reserve(adj.size());
        for (WindowId x : adj) pool.push_back({x, distance(nq, x)});
        adj = select_diverse(*this, std::move(pool), cap);
      }
    }
    entries = std::move(found);
  }
  if (level > max_level_) {
    max_level_ = level;
    entry_ = id;
  }
}

CorpusIndex CorpusIndex::build(std::vector<Trajectory> trajectories,
                               const PartitionParams& partition, const IndexParams& params,
                               CorpusKind kind, bool precompute_distinct,
                               SearchMode precompute_mode) {
  params.validate();
  CorpusIndex index;
  index.params_ = params;
  index.kind_ = kind;
  index.corpus_ = PartitionedCorpus(std::move(trajectories), partition);
  const std::size_t n = index.corpus_.window_count();
  index.levels_.assign(n, -1);
  index.links_.resize(n);
  std::uint64_t rng_state = params.seed;
  for (WindowId id = 0; id < n; ++id) {
    if (index.corpus_.is_stationary(id)) continue;
    index.insert(id, index.draw_level(rng_state));
  }
  if (index.indexed_count_ == 0) {
    throw std::invalid_argument("no trajectory yields an indexable window");
  }
  if (precompute_distinct) index.precompute_distinct(precompute_mode);
  return index;
}

void CorpusIndex::precompute_distinct(SearchMode mode) {
  distinct_ = kernels::distinct_table_omp(*this, params_.k, mode);
}

std::vector<Neighbor> CorpusIndex::knn(const QueryWindow& q, std::size_t k,
                                       SearchStats* stats) const {
  if (entry_ == kNoWindow || k == 0) return {};
  GraphSearcher searcher(*this, q, stats);
  // widen the beam by the number of windows that may be filtered out
  const std::size_t ef = std::max(params_.ef_search, k) + (q.exclude_window != kNoWindow ? 1 : 0);
  std::vector<Neighbor> found = searcher.layer({searcher.descend(0)}, ef, 0);
  std::vector<Neighbor> out;
  out.reserve(k);
  for (const Neighbor& n : found) {
    if (!searcher.admissible(n.id)) continue;
    out.push_back(n);
    if (out.size() == k) break;
  }
  return out;
}

std::vector<Neighbor> CorpusIndex::distinct_knn(const QueryWindow& q, std::size_t k,
                                                SearchStats* stats) const {
  if (entry_ == kNoWindow || k == 0) return {};
  // the result set can never hold more parents than exist; a larger beam
  // would never fill and the search would not terminate early
  std::size_t parents = corpus_.partitioned_trajectory_count();
  if (q.exclude_parent && parents > 1) --parents;
  const std::size_t ef = std::max<std::size_t>(std::min(std::max(params_.ef_distinct, k), parents), 1);
  GraphSearcher searcher(*this, q, stats);
  std::vector<Neighbor> found = searcher.distinct_layer(searcher.descend(0), ef);
  if (found.size() > k) found.resize(k);
  return found;
}

std::vector<Neighbor> CorpusIndex::exact_knn(const QueryWindow& q, std::size_t k,
                                             SearchStats* stats) const {
  if (stats != nullptr) stats->distance_evaluations += indexed_count_;
  return kernels::exact_knn_serial(*this, q, k);
}

std::vector<Neighbor> CorpusIndex::exact_distinct_knn(const QueryWindow& q, std::size_t k,
                                                      SearchStats* stats) const {
  if (stats != nullptr) stats->distance_evaluations += indexed_count_;
  return kernels::exact_distinct_knn_serial(*this, q, k);
}

std::vector<Neighbor> CorpusIndex::search(SearchMode mode, bool distinct, const QueryWindow& q,
                                          std::size_t k, SearchStats* stats) const {
  if (mode == SearchMode::exact) {
    return distinct ? exact_distinct_knn(q, k, stats) : exact_knn(q, k, stats);
  }
  return distinct ? distinct_knn(q, k, stats) : knn(q, k, stats);
}

}  // namespace obsdet

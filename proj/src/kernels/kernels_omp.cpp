#include <algorithm>
#include <vector>

#include <omp.h>

#include "obsdet/kernels.hpp"

namespace obsdet::kernels {
namespace {

bool admissible(const CorpusIndex& index, const QueryWindow& q, WindowId id) {
  if (!index.is_indexed(id) || id == q.exclude_window) return false;
  return !q.exclude_parent || index.corpus().parent_of(id) != *q.exclude_parent;
}

// Merges per-thread candidate lists; the (distance, id) order makes the
// result independent of how the scan was split.
std::vector<Neighbor> merge_top_k(std::vector<std::vector<Neighbor>>& parts, std::size_t k) {
  std::vector<Neighbor> all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    closer);
  all.resize(keep);
  return all;
}

void keep_top_k(std::vector<Neighbor>& v, std::size_t k) {
  if (v.size() <= 2 * k) return;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), closer);
  v.resize(k);
}

}  // namespace

void set_thread_count(int threads) {
  if (threads >= 1) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

std::vector<Neighbor> exact_knn_omp(const CorpusIndex& index, const QueryWindow& q,
                                    std::size_t k) {
  const auto n = static_cast<std::int64_t>(index.corpus().window_count());
  std::vector<std::vector<Neighbor>> parts(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
  {
    auto& local = parts[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto id = static_cast<WindowId>(i);
      if (!admissible(index, q, id)) continue;
      local.push_back({id, index.distance(q, id)});
      keep_top_k(local, k);
    }
  }
  return merge_top_k(parts, k);
}

std::vector<Neighbor> exact_distinct_knn_omp(const CorpusIndex& index, const QueryWindow& q,
                                             std::size_t k) {
  const PartitionedCorpus& corpus = index.corpus();
  const auto parents = static_cast<std::int64_t>(corpus.trajectory_count());
  std::vector<Neighbor> best(static_cast<std::size_t>(parents), Neighbor{kNoWindow, 0.0});
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t p = 0; p < parents; ++p) {
    const WindowId first = corpus.first_window(static_cast<ParentId>(p));
    if (first == kNoWindow) continue;
    Neighbor& b = best[static_cast<std::size_t>(p)];
    for (WindowId id = first; id < first + corpus.windows_of(static_cast<ParentId>(p)); ++id) {
      if (!admissible(index, q, id)) continue;
      const Neighbor n{id, index.distance(q, id)};
      if (b.id == kNoWindow || closer(n, b)) b = n;
    }
  }
  std::erase_if(best, [](const Neighbor& n) { return n.id == kNoWindow; });
  std::vector<std::vector<Neighbor>> parts{std::move(best)};
  return merge_top_k(parts, k);
}

std::vector<std::vector<Neighbor>> batch_search_omp(const CorpusIndex& index,
                                                    const std::vector<QueryWindow>& queries,
                                                    std::size_t k, SearchMode mode,
                                                    bool distinct) {
  std::vector<std::vector<Neighbor>> out(queries.size());
  const auto n = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    const QueryWindow& q = queries[static_cast<std::size_t>(i)];
    auto& slot = out[static_cast<std::size_t>(i)];
    if (mode == SearchMode::exact) {
      slot = distinct ? exact_distinct_knn_serial(index, q, k) : exact_knn_serial(index, q, k);
    } else {
      slot = distinct ? index.distinct_knn(q, k) : index.knn(q, k);
    }
  }
  return out;
}

NeighborTable distinct_table_omp(const CorpusIndex& index, std::size_t k, SearchMode mode) {
  const PartitionedCorpus& corpus = index.corpus();
  const auto n = static_cast<std::int64_t>(corpus.window_count());
  std::vector<std::vector<Neighbor>> lists(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto id = static_cast<WindowId>(i);
    if (!index.is_indexed(id)) continue;
    QueryWindow q = as_query(corpus, id);
    q.exclude_parent = corpus.parent_of(id);
    lists[static_cast<std::size_t>(i)] = mode == SearchMode::exact
                                             ? exact_distinct_knn_serial(index, q, k)
                                             : index.distinct_knn(q, k);
  }
  NeighborTable table;
  table.k = k;
  table.mode = mode;
  table.offsets.reserve(lists.size() + 1);
  table.offsets.push_back(0);
  for (const auto& l : lists) {
    table.entries.insert(table.entries.end(), l.begin(), l.end());
    table.offsets.push_back(static_cast<std::uint32_t>(table.entries.size()));
  }
  return table;
}

}  // namespace obsdet::kernels

#include <algorithm>
#include <unordered_map>

#include "obsdet/kernels.hpp"

namespace obsdet::kernels {
namespace {

bool admissible(const CorpusIndex& index, const QueryWindow& q, WindowId id) {
  if (!index.is_indexed(id) || id == q.exclude_window) return false;
  return !q.exclude_parent || index.corpus().parent_of(id) != *q.exclude_parent;
}

std::vector<Neighbor> top_k(std::vector<Neighbor> all, std::size_t k) {
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    closer);
  all.resize(keep);
  return all;
}

}  // namespace

std::vector<Neighbor> exact_knn_serial(const CorpusIndex& index, const QueryWindow& q,
                                       std::size_t k) {
  std::vector<Neighbor> all;
  all.reserve(index.indexed_count());
  for (WindowId id = 0; id < index.corpus().window_count(); ++id) {
    if (admissible(index, q, id)) all.push_back({id, index.distance(q, id)});
  }
  return top_k(std::move(all), k);
}

std::vector<Neighbor> exact_distinct_knn_serial(const CorpusIndex& index, const QueryWindow& q,
                                                std::size_t k) {
  const PartitionedCorpus& corpus = index.corpus();
  std::vector<Neighbor> per_parent;
  for (ParentId p = 0; p < corpus.trajectory_count(); ++p) {
    const WindowId first = corpus.first_window(p);
    if (first == kNoWindow) continue;
    Neighbor best{kNoWindow, 0.0};
    for (WindowId id = first; id < first + corpus.windows_of(p); ++id) {
      if (!admissible(index, q, id)) continue;
      const Neighbor n{id, index.distance(q, id)};
      if (best.id == kNoWindow || closer(n, best)) best = n;
    }
    if (best.id != kNoWindow) per_parent.push_back(best);
  }
  return top_k(std::move(per_parent), k);
}

std::vector<std::vector<Neighbor>> batch_search_serial(const CorpusIndex& index,
                                                       const std::vector<QueryWindow>& queries,
                                                       std::size_t k, SearchMode mode,
                                                       bool distinct) {
  std::vector<std::vector<Neighbor>> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (mode == SearchMode::exact) {
      out[i] = distinct ? exact_distinct_knn_serial(index, queries[i], k)
                        : exact_knn_serial(index, queries[i], k);
    } else {
      out[i] = distinct ? index.distinct_knn(queries[i], k) : index.knn(queries[i], k);
    }
  }
  return out;
}

NeighborTable distinct_table_serial(const CorpusIndex& index, std::size_t k, SearchMode mode) {
  const PartitionedCorpus& corpus = index.corpus();
  NeighborTable table;
  table.k = k;
  table.mode = mode;
  table.offsets.reserve(corpus.window_count() + 1);
  table.offsets.push_back(0);
  for (WindowId id = 0; id < corpus.window_count(); ++id) {
    if (index.is_indexed(id)) {
      QueryWindow q = as_query(corpus, id);
      q.exclude_parent = corpus.parent_of(id);
      const auto found = mode == SearchMode::exact ? exact_distinct_knn_serial(index, q, k)
                                                   : index.distinct_knn(q, k);
      table.entries.insert(table.entries.end(), found.begin(), found.end());
    }
    table.offsets.push_back(static_cast<std::uint32_t>(table.entries.size()));
  }
  return table;
}

}  // namespace obsdet::kernels

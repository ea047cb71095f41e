#pragma once

// Data-parallel kernels. Each OpenMP kernel has a serial reference twin with
// an identical contract; the two must agree exactly and are compared by the
// unit tests and the kernels benchmark.

#include <cstddef>
#include <vector>

#include "obsdet/knn_index.hpp"

namespace obsdet::kernels {

/// Caps the OpenMP worker count (values < 1 are ignored).
void set_thread_count(int threads);
int thread_count();

/// Linear scan over the indexed windows of `index`.
std::vector<Neighbor> exact_knn_serial(const CorpusIndex& index, const QueryWindow& q,
                                       std::size_t k);
std::vector<Neighbor> exact_knn_omp(const CorpusIndex& index, const QueryWindow& q,
                                    std::size_t k);

/// Linear scan keeping the nearest window per parent, then the top k parents.
std::vector<Neighbor> exact_distinct_knn_serial(const CorpusIndex& index, const QueryWindow& q,
                                                std::size_t k);
std::vector<Neighbor> exact_distinct_knn_omp(const CorpusIndex& index, const QueryWindow& q,
                                             std::size_t k);

/// Distinct-parent lists for every indexed window of `index`, each
/// excluding its own parent. Stationary windows get empty lists.
NeighborTable distinct_table_serial(const CorpusIndex& index, std::size_t k, SearchMode mode);
NeighborTable distinct_table_omp(const CorpusIndex& index, std::size_t k, SearchMode mode);

/// Answers many queries at once; result[i] belongs to queries[i].
std::vector<std::vector<Neighbor>> batch_search_serial(const CorpusIndex& index,
                                                       const std::vector<QueryWindow>& queries,
                                                       std::size_t k, SearchMode mode,
                                                       bool distinct);
std::vector<std::vector<Neighbor>> batch_search_omp(const CorpusIndex& index,
                                                    const std::vector<QueryWindow>& queries,
                                                    std::size_t k, SearchMode mode,
                                                    bool distinct);

}  // namespace obsdet::kernels

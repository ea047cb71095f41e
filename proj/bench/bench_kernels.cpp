// Serial reference kernels against their OpenMP twins on a synthetic corpus.
//
//   OMP_NUM_THREADS=8 ./build/bench/bench_kernels

#include <benchmark/benchmark.h>

#include <map>

#include "obsdet/geo_io.hpp"
#include "obsdet/kernels.hpp"
#include "obsdet/knn_index.hpp"

namespace {

using namespace obsdet;

const CorpusIndex& corpus_of_size(std::size_t trajectories) {
  static std::map<std::size_t, CorpusIndex> cache;
  auto it = cache.find(trajectories);
  if (it == cache.end()) {
    ScenarioParams p;
    p.reference_count = trajectories;
    p.query_count = 10;
    Scenario sc = generate_scenario(p);
    it = cache.emplace(trajectories, CorpusIndex::build(std::move(sc.reference), {}, {},
                                                        CorpusKind::reference, false))
             .first;
  }
  return it->second;
}

std::vector<QueryWindow> sample_queries(const CorpusIndex& index, std::size_t count) {
  std::vector<QueryWindow> qs;
  const std::size_t n = index.corpus().window_count();
  for (std::size_t i = 0; i < count; ++i) {
    qs.push_back(as_query(index.corpus(), static_cast<WindowId>((i * 7919) % n)));
  }
  return qs;
}

void BM_ExactKnnSerial(benchmark::State& state) {
  const CorpusIndex& index = corpus_of_size(static_cast<std::size_t>(state.range(0)));
  const QueryWindow q = as_query(index.corpus(), 17);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::exact_knn_serial(index, q, 8));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(index.indexed_count()));
}

void BM_ExactKnnOmp(benchmark::State& state) {
  const CorpusIndex& index = corpus_of_size(static_cast<std::size_t>(state.range(0)));
  const QueryWindow q = as_query(index.corpus(), 17);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::exact_knn_omp(index, q, 8));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(index.indexed_count()));
}

void BM_DistinctTableSerial(benchmark::State& state) {
  const CorpusIndex& index = corpus_of_size(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::distinct_table_serial(index, 8, SearchMode::graph));
  }
}

void BM_DistinctTableOmp(benchmark::State& state) {
  const CorpusIndex& index = corpus_of_size(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::distinct_table_omp(index, 8, SearchMode::graph));
  }
}

void BM_BatchGraphSerial(benchmark::State& state) {
  const CorpusIndex& index = corpus_of_size(static_cast<std::size_t>(state.range(0)));
  const auto qs = sample_queries(index, 256);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::batch_search_serial(index, qs, 8, SearchMode::graph, true));
  }
}

void BM_BatchGraphOmp(benchmark::State& state) {
  const CorpusIndex& index = corpus_of_size(static_cast<std::size_t>(state.range(0)));
  const auto qs = sample_queries(index, 256);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::batch_search_omp(index, qs, 8, SearchMode::graph, true));
  }
}

}  // namespace

BENCHMARK(BM_ExactKnnSerial)->Arg(50)->Arg(200);
BENCHMARK(BM_ExactKnnOmp)->Arg(50)->Arg(200);
BENCHMARK(BM_DistinctTableSerial)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistinctTableOmp)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGraphSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGraphOmp)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

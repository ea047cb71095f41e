#include "obsdet/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "obsdet/similarity.hpp"

namespace obsdet {

void DensityParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sigma must be a positive finite number");
  }
}

double gaussian_kernel(double distance, double sigma) {
  if (std::isinf(distance)) return 0.0;
  return std::exp(-(distance * distance) / (2.0 * sigma * sigma));
}

namespace {

double normalize(double sum, const DensityParams& params, std::size_t trajectory_count) {
  if (params.normalization == DensityNormalization::paper_literal) {
    return trajectory_count == 0 ? 0.0 : sum / static_cast<double>(trajectory_count);
  }
  return sum;
}

}  // namespace

double density(std::span<const Neighbor> neighbors, const DensityParams& params,
               std::size_t trajectory_count) {
  double sum = 0.0;
  for (const Neighbor& n : neighbors) sum += gaussian_kernel(n.distance, params.sigma);
  return normalize(sum, params, trajectory_count);
}

double succ_density(const PartitionedCorpus& own, WindowId t,
                    const PartitionedCorpus& neighbor_corpus,
                    std::span<const Neighbor> neighbors, const DensityParams& params,
                    std::size_t trajectory_count, SearchStats* stats) {
  const auto t_next = own.succ(t);
  if (!t_next) throw std::logic_error("succ_density requires a window with a succeed");
  const auto t_points = own.window(*t_next).points;
  const double t_norm = own.sqrt_path_length(*t_next);
  double sum = 0.0;
  for (const Neighbor& n : neighbors) {
    const auto n_next = neighbor_corpus.succ(n.id);
    if (!n_next) continue;
    if (stats != nullptr) ++stats->distance_evaluations;
    const double succ_distance =
        ndtw_prepared(t_points, t_norm, neighbor_corpus.window(*n_next).points,
                      neighbor_corpus.sqrt_path_length(*n_next));
    sum += gaussian_kernel(std::max(n.distance, succ_distance), params.sigma);
  }
  return normalize(sum, params, trajectory_count);
}

DensityProfile make_profile(double f_ref, double f_ref_succ, double f_qry, double f_qry_succ) {
  DensityProfile p;
  p.f_ref = f_ref;
  p.f_ref_succ = f_ref_succ;
  p.f_qry = f_qry;
  p.f_qry_succ = f_qry_succ;
  p.supported = f_ref > 0.0 && f_qry > 0.0;
  if (p.supported) {
    p.p1 = f_ref_succ / f_ref;
    p.p2 = f_qry_succ / f_qry;
    p.p_pooled = (f_ref * p.p1 + f_qry * p.p2) / (f_ref + f_qry);
    // rounding may push the pooled value a hair outside [min(p1,p2), max(p1,p2)]
    p.p_pooled = std::clamp(p.p_pooled, std::min(p.p1, p.p2), std::max(p.p1, p.p2));
  }
  return p;
}

DensityProfile density_profile(WindowId t, const CorpusIndex& reference, const CorpusIndex& query,
                               const DensityParams& params, std::size_t k,
                               const ProfileOptions& options, SearchStats* stats) {
  const PartitionedCorpus& ref = reference.corpus();
  std::vector<Neighbor> searched;
  std::span<const Neighbor> ref_neighbors;
  if (options.use_precomputed_reference && reference.has_distinct_table() &&
      reference.distinct_table().k >= k && reference.distinct_table().mode == options.mode) {
    ref_neighbors = reference.distinct_table()[t];
    if (ref_neighbors.size() > k) ref_neighbors = ref_neighbors.first(k);
  } else {
    QueryWindow q = as_query(ref, t);
    q.exclude_parent = ref.parent_of(t);
    searched = reference.search(options.mode, true, q, k, stats);
    ref_neighbors = searched;
  }
  const std::vector<Neighbor> qry_neighbors =
      query.search(options.mode, true, as_query(ref, t), k, stats);

  const double f_ref = density(ref_neighbors, params, reference.trajectory_count());
  const double f_ref_succ = succ_density(ref, t, ref, ref_neighbors, params,
                                         reference.trajectory_count(), stats);
  const double f_qry = density(qry_neighbors, params, query.trajectory_count());
  const double f_qry_succ = succ_density(ref, t, query.corpus(), qry_neighbors, params,
                                         query.trajectory_count(), stats);
  return make_profile(f_ref, f_ref_succ, f_qry, f_qry_succ);
}

}  // namespace obsdet

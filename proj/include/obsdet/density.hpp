#pragma once

#include <cstddef>
#include <span>

#include "obsdet/knn_index.hpp"

namespace obsdet {

enum class DensityNormalization : std::uint8_t {
  kernel_sum,     // plain sum of kernel values, bounded by k
  paper_literal,  // the sum divided by the corpus trajectory count
};

struct DensityParams {
  double sigma = 1.0;
  DensityNormalization normalization = DensityNormalization::kernel_sum;

  void validate() const;
};

/// Gaussian kernel exp(-d^2 / (2 sigma^2)); zero for infinite d.
double gaussian_kernel(double distance, double sigma);

/// Kernel sum over a distinct-parent neighbor list. Empty lists give 0.
double density(std::span<const Neighbor> neighbors, const DensityParams& params,
               std::size_t trajectory_count);

/// Succeed density of window `t` of `own` over the same neighbor list,
/// drawn from `neighbor_corpus`. Each neighbor contributes
/// kernel(max(d_i, nDTW(succ(t), succ(t_i)))); neighbors without a succeed
/// contribute 0. Throws std::logic_error if `t` has no succeed.
double succ_density(const PartitionedCorpus& own, WindowId t,
                    const PartitionedCorpus& neighbor_corpus,
                    std::span<const Neighbor> neighbors, const DensityParams& params,
                    std::size_t trajectory_count, SearchStats* stats = nullptr);

/// The four densities of a reference window and the ratios derived from them.
struct DensityProfile {
  double f_ref = 0.0;
  double f_ref_succ = 0.0;
  double f_qry = 0.0;
  double f_qry_succ = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p_pooled = 0.0;
  bool supported = false;  // both f_ref and f_qry positive; ratios undefined otherwise
};

/// Fills the ratio fields of a profile from its four densities.
DensityProfile make_profile(double f_ref, double f_ref_succ, double f_qry, double f_qry_succ);

/// How density_profile() obtains neighbor lists.
struct ProfileOptions {
  SearchMode mode = SearchMode::graph;
  /// Read the reference list from the precomputed table when available.
  bool use_precomputed_reference = true;
};

/// Profile of reference window `t` (which must have a succeed) against both indexes.
DensityProfile density_profile(WindowId t, const CorpusIndex& reference, const CorpusIndex& query,
                               const DensityParams& params, std::size_t k,
                               const ProfileOptions& options = {}, SearchStats* stats = nullptr);

}  // namespace obsdet

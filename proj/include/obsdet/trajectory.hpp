#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "obsdet/geo_point.hpp"

namespace obsdet {

/// Index of a window inside a PartitionedCorpus.
using WindowId = std::uint32_t;
/// Ordinal of a trajectory inside a PartitionedCorpus.
using ParentId = std::uint32_t;

inline constexpr WindowId kNoWindow = static_cast<WindowId>(-1);

/// An ordered, uniformly time-spaced sequence of planar points.
struct Trajectory {
  std::string id;
  std::vector<GeoPoint> points;

  std::size_t length() const { return points.size(); }
};

/// Sliding-window geometry: windows of `window` points advanced by `step` points.
struct PartitionParams {
  std::size_t window = 6;
  std::size_t step = 1;

  /// Throws std::invalid_argument unless 0 < step < window.
  void validate() const;
  friend bool operator==(const PartitionParams&, const PartitionParams&) = default;
};

/// A fixed-width window viewed in place over its parent's points.
struct SubTrajectory {
  ParentId parent = 0;
  std::uint32_t index_in_parent = 0;
  std::uint32_t start_offset = 0;
  std::span<const GeoPoint> points;

  std::size_t size() const { return points.size(); }
  GeoPoint last_point() const { return points.back(); }

  /// Coordinate `i` of the flat 2w-vector (x0, y0, x1, y1, ...).
  double component(std::size_t i) const {
    const GeoPoint& p = points[i / 2];
    return (i % 2 == 0) ? p.x : p.y;
  }
  std::size_t dimension() const { return 2 * points.size(); }
};

/// Window placement returned by partition(): offsets only, no copies.
struct WindowSpan {
  std::uint32_t index_in_parent = 0;
  std::uint32_t start_offset = 0;
};

/// Windows T[i*s, i*s + w) for i = 0..floor((l - w) / s); empty when l < w.
std::vector<WindowSpan> partition(std::size_t length, const PartitionParams& params);

/// Materializes the views of partition() over `t`. `parent` tags the result.
std::vector<SubTrajectory> partition(const Trajectory& t, const PartitionParams& params,
                                     ParentId parent = 0);

/// Trajectories plus all of their windows. Immutable after construction.
///
/// Window ids are dense and grouped by parent in insertion order, so the
/// succeed of window `id` is `id + 1` whenever both share a parent.
class PartitionedCorpus {
 public:
  PartitionedCorpus() = default;
  PartitionedCorpus(std::vector<Trajectory> trajectories, PartitionParams params);

  const PartitionParams& params() const { return params_; }
  const std::vector<Trajectory>& trajectories() const { return trajectories_; }
  std::size_t window_count() const { return windows_.size(); }
  std::size_t trajectory_count() const { return trajectories_.size(); }
  /// Trajectories that contributed at least one window.
  std::size_t partitioned_trajectory_count() const { return partitioned_parents_; }

  SubTrajectory window(WindowId id) const;
  ParentId parent_of(WindowId id) const { return windows_[id].parent; }
  std::uint32_t index_in_parent(WindowId id) const { return windows_[id].index_in_parent; }
  /// First window of `parent`, or kNoWindow if it produced none.
  WindowId first_window(ParentId parent) const;
  std::size_t windows_of(ParentId parent) const { return windows_per_parent_[parent]; }

  /// Next window of the same parent, absent for the last full window.
  std::optional<WindowId> succ(WindowId id) const;

  /// sqrt(path length) of a window, cached at construction.
  double sqrt_path_length(WindowId id) const { return sqrt_lengths_[id]; }
  /// Zero-length windows have undefined nDTW and are never indexed.
  bool is_stationary(WindowId id) const { return sqrt_lengths_[id] == 0.0; }

 private:
  struct WindowRecord {
    ParentId parent;
    std::uint32_t index_in_parent;
    std::uint32_t start_offset;
  };

  PartitionParams params_;
  std::vector<Trajectory> trajectories_;
  std::vector<WindowRecord> windows_;
  std::vector<WindowId> first_window_;
  std::vector<std::uint32_t> windows_per_parent_;
  std::vector<double> sqrt_lengths_;
  std::size_t partitioned_parents_ = 0;
};

}  // namespace obsdet

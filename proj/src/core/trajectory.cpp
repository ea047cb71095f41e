#include "obsdet/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "obsdet/similarity.hpp"

namespace obsdet {

void PartitionParams::validate() const {
  if (step == 0 || step >= window) {
    throw std::invalid_argument("partition requires 0 < step < window (got window=" +
                                std::to_string(window) + ", step=" + std::to_string(step) + ")");
  }
}

std::vector<WindowSpan> partition(std::size_t length, const PartitionParams& params) {
  params.validate();
  std::vector<WindowSpan> spans;
  if (length < params.window) return spans;
  const std::size_t count = (length - params.window) / params.step + 1;
  spans.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    spans.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i * params.step)});
  }
  return spans;
}

std::vector<SubTrajectory> partition(const Trajectory& t, const PartitionParams& params,
                                     ParentId parent) {
  std::vector<SubTrajectory> subs;
  const std::span<const GeoPoint> all(t.points);
  for (const WindowSpan& s : partition(t.length(), params)) {
    subs.push_back({parent, s.index_in_parent, s.start_offset,
                    all.subspan(s.start_offset, params.window)});
  }
  return subs;
}

PartitionedCorpus::PartitionedCorpus(std::vector<Trajectory> trajectories, PartitionParams params)
    : params_(params), trajectories_(std::move(trajectories)) {
  params_.validate();
  first_window_.assign(trajectories_.size(), kNoWindow);
  windows_per_parent_.assign(trajectories_.size(), 0);
  for (ParentId p = 0; p < trajectories_.size(); ++p) {
    const Trajectory& t = trajectories_[p];
    for (const GeoPoint& pt : t.points) {
      if (!is_finite(pt)) {
        throw std::invalid_argument("trajectory '" + t.id + "' contains a non-finite point");
      }
    }
    const auto spans = partition(t.length(), params_);
    if (spans.empty()) continue;
    ++partitioned_parents_;
    first_window_[p] = static_cast<WindowId>(windows_.size());
    windows_per_parent_[p] = static_cast<std::uint32_t>(spans.size());
    for (const WindowSpan& s : spans) {
      windows_.push_back({p, s.index_in_parent, s.start_offset});
    }
  }
  sqrt_lengths_.reserve(windows_.size());
  for (WindowId id = 0; id < windows_.size(); ++id) {
    sqrt_lengths_.push_back(std::sqrt(path_length(window(id).points)));
  }
}

SubTrajectory PartitionedCorpus::window(WindowId id) const {
  const WindowRecord& r = windows_[id];
  const std::span<const GeoPoint> all(trajectories_[r.parent].points);
  return {r.parent, r.index_in_parent, r.start_offset, all.subspan(r.start_offset, params_.window)};
}

WindowId PartitionedCorpus::first_window(ParentId parent) const { return first_window_[parent]; }

std::optional<WindowId> PartitionedCorpus::succ(WindowId id) const {
  const WindowRecord& r = windows_[id];
  if (r.index_in_parent + 1 >= windows_per_parent_[r.parent]) return std::nullopt;
  return id + 1;
}

}  // namespace obsdet

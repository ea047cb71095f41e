#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <type_traits>

#include "obsdet/knn_index.hpp"

namespace obsdet {
namespace {

constexpr std::array<char, 8> kMagic{'O', 'B', 'S', 'D', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void pod(const T& value) {
    static_assert(std::is_trivially_copyable_v<T>);
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void u64(std::size_t v) { pod(static_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T pod() {
    static_assert(std::is_trivially_copyable_v<T>);
    T value;
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in_) throw std::runtime_error("index file truncated");
    return value;
  }
  std::size_t u64(std::size_t limit = std::size_t{1} << 40) {
    const auto v = pod<std::uint64_t>();
    if (v > limit) throw std::runtime_error("index file corrupt: count out of range");
    return static_cast<std::size_t>(v);
  }
  std::string str() {
    std::string s(u64(1 << 20), '\0');
    in_.read(s.data(), static_cast<std::streamsize>(s.size()));
    if (!in_) throw std::runtime_error("index file truncated");
    return s;
  }

 private:
  std::istream& in_;
};

}  // namespace

void CorpusIndex::save(std::ostream& out) const {
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.pod(kFormatVersion);
  w.pod(static_cast<std::uint8_t>(kind_));

  const PartitionParams& pp = corpus_.params();
  w.u64(pp.window);
  w.u64(pp.step);
  w.u64(params_.k);
  w.u64(params_.max_degree);
  w.u64(params_.ef_construction);
  w.u64(params_.ef_search);
  w.u64(params_.ef_distinct);
  w.pod(params_.seed);

  w.pod(static_cast<std::uint8_t>(origin_.has_value()));
  const ProjectionOrigin origin = origin_.value_or(ProjectionOrigin{});
  w.pod(origin.lat);
  w.pod(origin.lon);

  w.u64(corpus_.trajectory_count());
  for (const Trajectory& t : corpus_.trajectories()) {
    w.str(t.id);
    w.u64(t.points.size());
    for (const GeoPoint& p : t.points) {
      w.pod(p.x);
      w.pod(p.y);
    }
  }

  w.u64(corpus_.window_count());
  w.pod(entry_);
  w.pod(static_cast<std::int32_t>(max_level_));
  for (WindowId id = 0; id < corpus_.window_count(); ++id) {
    w.pod(static_cast<std::int32_t>(levels_[id]));
    for (int level = 0; level <= levels_[id]; ++level) {
      const auto& adj = links_[id][level];
      w.pod(static_cast<std::uint32_t>(adj.size()));
      for (WindowId nb : adj) w.pod(nb);
    }
  }

  w.pod(static_cast<std::uint8_t>(has_distinct_table()));
  if (has_distinct_table()) {
    w.u64(distinct_.k);
    w.pod(static_cast<std::uint8_t>(distinct_.mode));
    for (std::uint32_t off : distinct_.offsets) w.pod(off);
    for (const Neighbor& n : distinct_.entries) {
      w.pod(n.id);
      w.pod(n.distance);
    }
  }
  if (!out) throw std::runtime_error("failed writing index");
}

CorpusIndex CorpusIndex::load(std::istream& in) {
  Reader r(in);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("not an obstacle index file");
  const auto version = r.pod<std::uint32_t>();
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported index format version " + std::to_string(version));
  }
  CorpusIndex index;
  const auto kind = r.pod<std::uint8_t>();
  if (kind > 1) throw std::runtime_error("index file corrupt: bad corpus kind");
  index.kind_ = static_cast<CorpusKind>(kind);

  PartitionParams pp;
  pp.window = r.u64();
  pp.step = r.u64();
  index.params_.k = r.u64();
  index.params_.max_degree = r.u64();
  index.params_.ef_construction = r.u64();
  index.params_.ef_search = r.u64();
  index.params_.ef_distinct = r.u64();
  index.params_.seed = r.pod<std::uint64_t>();
  index.params_.validate();

  const bool has_origin = r.pod<std::uint8_t>() != 0;
  ProjectionOrigin origin;
  origin.lat = r.pod<double>();
  origin.lon = r.pod<double>();
  if (has_origin) index.origin_ = origin;

  std::vector<Trajectory> trajectories(r.u64());
  for (Trajectory& t : trajectories) {
    t.id = r.str();
    t.points.resize(r.u64());
    for (GeoPoint& p : t.points) {
      p.x = r.pod<double>();
      p.y = r.pod<double>();
    }
  }
  index.corpus_ = PartitionedCorpus(std::move(trajectories), pp);

  const std::size_t n = r.u64();
  if (n != index.corpus_.window_count()) {
    throw std::runtime_error("index file corrupt: window count mismatch");
  }
  index.entry_ = r.pod<WindowId>();
  index.max_level_ = r.pod<std::int32_t>();
  index.levels_.assign(n, -1);
  index.links_.resize(n);
  for (WindowId id = 0; id < n; ++id) {
    const int level = r.pod<std::int32_t>();
    if (level < -1 || level > 64) throw std::runtime_error("index file corrupt: bad level");
    index.levels_[id] = level;
    if (level >= 0) ++index.indexed_count_;
    index.links_[id].resize(static_cast<std::size_t>(level + 1));
    for (int lc = 0; lc <= level; ++lc) {
      auto& adj = index.links_[id][lc];
      adj.resize(r.pod<std::uint32_t>());
      for (WindowId& nb : adj) {
        nb = r.pod<WindowId>();
        if (nb >= n) throw std::runtime_error("index file corrupt: dangling edge");
      }
    }
  }
  if (index.indexed_count_ > 0 && index.entry_ >= n) {
    throw std::runtime_error("index file corrupt: bad entry point");
  }

  if (r.pod<std::uint8_t>() != 0) {
    NeighborTable& table = index.distinct_;
    table.k = r.u64();
    table.mode = static_cast<SearchMode>(r.pod<std::uint8_t>());
    table.offsets.resize(n + 1);
    for (std::uint32_t& off : table.offsets) off = r.pod<std::uint32_t>();
    table.entries.resize(table.offsets.back());
    for (Neighbor& e : table.entries) {
      e.id = r.pod<WindowId>();
      e.distance = r.pod<double>();
    }
  }
  return index;
}

void CorpusIndex::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save(out);
}

CorpusIndex CorpusIndex::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open index '" + path + "'");
  return load(in);
}

}  // namespace obsdet

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "obsdet/trajectory.hpp"
#include "oracles.hpp"

namespace testing_support {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("obsdet_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// `count` random-walk trajectories of `length` points each.
inline std::vector<obsdet::Trajectory> random_trajectories(std::uint64_t seed, std::size_t count,
                                                           std::size_t length,
                                                           double spread = 10.0) {
  std::mt19937_64 rng(seed);
  std::vector<obsdet::Trajectory> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back({"t" + std::to_string(i), oracle::random_walk(rng, length, 0.5, 2.0, spread)});
  }
  return out;
}

}  // namespace testing_support

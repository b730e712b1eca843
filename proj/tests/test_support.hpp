#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "romkit/model.hpp"

namespace romkit::testing {

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("romkit-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Greedy model at refine 16 on the 10x10 grid, tol 1e-5, all surrogates.
/// Built once per test binary.
inline const ModelArtifacts& reference_model() {
  static const ModelArtifacts model = [] {
    OfflineSettings s;
    s.surrogates = {OnlineMethod::pod_rbf, OnlineMethod::local_pod_rbf, OnlineMethod::pod_nn};
    s.nn.epochs = 2000;
    return run_offline(s, "thermal-block").artifacts;
  }();
  return model;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace romkit::testing

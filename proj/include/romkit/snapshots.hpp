#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "romkit/affine_system.hpp"

namespace romkit {

enum class GridKind {
  /// Endpoints included: mu0 log-spaced over [0.1, 10], mu1 uniform over [-1, 1].
  training,
  /// Cell midpoints of the same spacing; never hits a training point.
  validation,
};

struct GridSpec {
  std::size_t n_mu0 = 10;
  std::size_t n_mu1 = 10;
  GridKind kind = GridKind::training;
  /// Collapses the mu0 axis onto a single value (mu1-only sweeps).
  std::optional<double> fixed_mu0;

  /// Parses `AxB`, e.g. `10x10`.
  static GridSpec parse(const std::string& text, GridKind kind = GridKind::training);
  std::string to_string() const;
  std::size_t size() const { return (fixed_mu0 ? 1 : n_mu0) * n_mu1; }

  std::vector<double> mu0_values() const;
  std::vector<double> mu1_values() const;
  /// Row-major: mu0 outer, mu1 inner.
  std::vector<ParameterPoint> points() const;
};

struct SnapshotSet {
  std::vector<ParameterPoint> parameters;
  /// Free-node fields, one column per parameter.
  Eigen::MatrixXd fields;
  std::string provenance;

  std::size_t size() const { return parameters.size(); }
};

SnapshotSet generate_snapshots(const AffineSystem& sys, const std::vector<ParameterPoint>& points,
                               std::string provenance = {});
SnapshotSet generate_snapshots(const AffineSystem& sys, const GridSpec& grid);

}  // namespace romkit

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "romkit/affine_system.hpp"
#include "romkit/reduced_model.hpp"

namespace romkit {

enum class GreedyStop { tolerance, max_dimension, dependent_snapshot };

struct GreedyOptions {
  double tol = 1e-5;
  std::size_t n_max = 20;
  /// Defaults to the first training point.
  std::optional<ParameterPoint> mu_start;
  /// Use eta / ||u_rb||_mu instead of the absolute bound.
  bool relative = false;
};

struct GreedyTrace {
  std::vector<ParameterPoint> selected_parameters;
  /// max_eta_history[k]: max over the training set with k + 1 basis vectors.
  std::vector<double> max_eta_history;
  double final_tol = 0.0;
  bool converged = false;
  GreedyStop stop = GreedyStop::tolerance;
};

struct GreedyResult {
  ReducedBasis basis;
  ReducedModel model;
  GreedyTrace trace;
};

/// Online estimator swept over a parameter set; returns one value per point.
std::vector<double> estimator_sweep(const ReducedModel& model,
                                    const std::vector<ParameterPoint>& points, bool relative);

/// Certified greedy: enrich with the FOM snapshot at the argmax of the
/// estimator (ties go to the lowest index) until max eta <= tol, n_max is
/// reached, or the new snapshot is numerically dependent.
GreedyResult greedy(const AffineSystem& sys, const std::vector<ParameterPoint>& train,
                    const GreedyOptions& options);

/// `iter,mu0,mu1,max_eta`
void write_greedy_trace_csv(std::ostream& out, const GreedyTrace& trace);

}  // namespace romkit

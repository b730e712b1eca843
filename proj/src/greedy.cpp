#include "romkit/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"

namespace romkit {

std::vector<double> estimator_sweep(const ReducedModel& model,
                                    const std::vector<ParameterPoint>& points, bool relative) {
  std::vector<double> eta(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto sol = rom_solve(model, points[k], model.dim());
    eta[k] = sol.eta_en;
    if (relative) {
      const auto ta = theta_a(points[k]);
      double energy = 0.0;
      for (std::size_t q = 0; q < q_a; ++q) {
        energy += ta[q] * sol.coefficients.dot(model.a_rb[q] * sol.coefficients);
      }
      eta[k] = energy > 0.0 ? eta[k] / std::sqrt(energy) : 0.0;
    }
  }
  return eta;
}

GreedyResult greedy(const AffineSystem& sys, const std::vector<ParameterPoint>& train,
                    const GreedyOptions& options) {
  if (!(options.tol > 0.0)) fail(ErrorCode::invalid_argument, "greedy: tol must be positive");
  if (options.n_max < 1) fail(ErrorCode::invalid_argument, "greedy: n_max must be >= 1");
  if (train.empty()) fail(ErrorCode::invalid_argument, "greedy: empty training set");

  ParameterPoint mu = options.mu_start.value_or(train.front());
  if (std::find(train.begin(), train.end(), mu) == train.end()) {
    fail(ErrorCode::invalid_argument, "greedy: mu_start is not a training point");
  }

  GreedyResult result;
  result.trace.final_tol = options.tol;
  result.basis.vectors.resize(sys.free_count(), 0);

  while (true) {
    const FomSolution snapshot = fom_solve(sys, mu);
    const auto q = orthonormal_complement(result.basis, snapshot.free_values, sys.gram_x());
    if (!q) {
      if (result.basis.dim() == 0) {
        fail(ErrorCode::dependent_snapshot,
             "greedy: snapshot at mu = (" + format_double(mu.mu0) + ", " +
                 format_double(mu.mu1) + ") is numerically zero");
      }
      result.trace.stop = GreedyStop::dependent_snapshot;
      break;
    }
    auto& v = result.basis.vectors;
    v.conservativeResize(Eigen::NoChange, v.cols() + 1);
    v.col(v.cols() - 1) = *q;
    result.trace.selected_parameters.push_back(mu);
    result.model = project(sys, result.basis);

    const auto eta = estimator_sweep(result.model, train, options.relative);
    const auto it = std::max_element(eta.begin(), eta.end());  // first maximum on ties
    result.trace.max_eta_history.push_back(*it);
    if (*it <= options.tol) {
      result.trace.converged = true;
      result.trace.stop = GreedyStop::tolerance;
      break;
    }
    if (result.basis.dim() >= options.n_max) {
      result.trace.stop = GreedyStop::max_dimension;
      break;
    }
    mu = train[static_cast<std::size_t>(it - eta.begin())];
  }
  return result;
}

void write_greedy_trace_csv(std::ostream& out, const GreedyTrace& trace) {
  out << "iter,mu0,mu1,max_eta\n";
  for (std::size_t k = 0; k < trace.selected_parameters.size(); ++k) {
    const auto& mu = trace.selected_parameters[k];
    const double eta = k < trace.max_eta_history.size()
                           ? trace.max_eta_history[k]
                           : std::numeric_limits<double>::quiet_NaN();
    out << k + 1 << ',' << format_double(mu.mu0) << ',' << format_double(mu.mu1) << ','
        << format_double(eta) << '\n';
  }
}

}  // namespace romkit

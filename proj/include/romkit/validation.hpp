#pragma once

#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "romkit/model.hpp"

namespace romkit {

/// Per-n statistics over a validation grid. Errors are energy-norm errors
/// unless named otherwise; effectivity statistics skip round-off-level errors.
struct ConvergenceRow {
  OnlineMethod method = OnlineMethod::rb;
  std::size_t n = 0;
  double mean_energy_error = 0.0;
  double max_energy_error = 0.0;
  double mean_relative_error = 0.0;
  double max_relative_error = 0.0;
  double mean_eta = 0.0;
  double max_eta = 0.0;
  double mean_effectivity = 0.0;
  double min_effectivity = 0.0;
  double max_effectivity = 0.0;
  double mean_output_error = 0.0;
  double max_output_error = 0.0;
};

struct ValidationResult {
  std::vector<ErrorReport> reports;
  /// Method of each report, parallel to `reports`.
  std::vector<OnlineMethod> report_methods;
  std::vector<ConvergenceRow> rows;
  double mean_fom_ms = 0.0;
  /// Mean RB online time at n = N.
  double mean_online_ms = 0.0;
  double speedup = 0.0;
};

/// Sweeps every grid point for n = 1..N of each method (RB always first).
ValidationResult run_validation(const ModelArtifacts& model, const GridSpec& grid,
                                const std::vector<OnlineMethod>& methods = {OnlineMethod::rb});

/// `method,mu0,mu1,n,v_err,en_err,eta,effectivity,rel_err,s_err`
void write_validation_report_csv(std::ostream& out, const ValidationResult& result);
/// `method,n,mean_en_err,max_en_err,mean_rel_err,max_rel_err,mean_eta,max_eta,
///  mean_eff,min_eff,max_eff,mean_s_err,max_s_err`
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);
/// `mean_fom_ms,mean_online_ms,speedup`
void write_timing_csv(std::ostream& out, const ValidationResult& result);

nlohmann::json convergence_to_json(const std::vector<ConvergenceRow>& rows);

}  // namespace romkit

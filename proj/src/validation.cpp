#include "romkit/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"

namespace romkit {

namespace {

struct Accumulator {
  double sum = 0.0;
  double max = 0.0;
  double min = std::numeric_limits<double>::infinity();
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    max = count == 0 ? v : std::max(max, v);
    min = std::min(min, v);
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN(); }
  double maximum() const { return count ? max : std::numeric_limits<double>::quiet_NaN(); }
  double minimum() const { return count ? min : std::numeric_limits<double>::quiet_NaN(); }
};

}  // namespace

ValidationResult run_validation(const ModelArtifacts& model, const GridSpec& grid,
                                const std::vector<OnlineMethod>& methods) {
  const AffineSystem& sys = *model.system;
  std::vector<OnlineMethod> order{OnlineMethod::rb};
  for (const auto m : methods) {
    if (std::find(order.begin(), order.end(), m) == order.end()) order.push_back(m);
  }
  for (const auto m : order) model.method_dim(m);

  const auto points = grid.points();
  std::vector<FomSolution> foms;
  foms.reserve(points.size());
  double fom_seconds = 0.0;
  double online_seconds = 0.0;
  for (const auto& mu : points) {
    foms.push_back(fom_solve(sys, mu));
    fom_seconds += foms.back().wall_time;
    online_seconds += rom_solve(model.reduced, mu, model.reduced.dim()).wall_time;
  }

  ValidationResult result;
  for (const auto method : order) {
    const std::size_t dim = model.method_dim(method);
    for (std::size_t n = 1; n <= dim; ++n) {
      Accumulator en, rel, eta, eff, s;
      for (std::size_t k = 0; k < points.size(); ++k) {
        const OnlineResult online = online_solve(model, method, points[k], n);
        const ErrorReport r = compare_with_fom(sys, points[k], online, foms[k]);
        en.add(r.energy_norm_error);
        rel.add(r.relative_error);
        eta.add(r.eta_en);
        if (!std::isnan(r.effectivity)) eff.add(r.effectivity);
        s.add(r.output_error);
        result.reports.push_back(r);
        result.report_methods.push_back(method);
      }
      ConvergenceRow row;
      row.method = method;
      row.n = n;
      row.mean_energy_error = en.mean();
      row.max_energy_error = en.maximum();
      row.mean_relative_error = rel.mean();
      row.max_relative_error = rel.maximum();
      row.mean_eta = eta.mean();
      row.max_eta = eta.maximum();
      row.mean_effectivity = eff.mean();
      row.min_effectivity = eff.minimum();
      row.max_effectivity = eff.maximum();
      row.mean_output_error = s.mean();
      row.max_output_error = s.maximum();
      result.rows.push_back(row);
    }
  }
  const double count = static_cast<double>(std::max<std::size_t>(points.size(), 1));
  result.mean_fom_ms = fom_seconds / count * 1e3;
  result.mean_online_ms = online_seconds / count * 1e3;
  result.speedup = result.mean_online_ms > 0.0 ? result.mean_fom_ms / result.mean_online_ms
                                               : std::numeric_limits<double>::infinity();
  return result;
}

void write_validation_report_csv(std::ostream& out, const ValidationResult& result) {
  out << "method,";
  write_error_report_header(out);
  for (std::size_t k = 0; k < result.reports.size(); ++k) {
    out << to_string(result.report_methods[k]) << ',';
    write_error_report_row(out, result.reports[k]);
  }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "method,n,mean_en_err,max_en_err,mean_rel_err,max_rel_err,mean_eta,max_eta,"
         "mean_eff,min_eff,max_eff,mean_s_err,max_s_err\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << r.n;
    for (const double v : {r.mean_energy_error, r.max_energy_error, r.mean_relative_error,
                           r.max_relative_error, r.mean_eta, r.max_eta, r.mean_effectivity,
                           r.min_effectivity, r.max_effectivity, r.mean_output_error,
                           r.max_output_error}) {
      out << ',' << format_double(v);
    }
    out << '\n';
  }
}

void write_timing_csv(std::ostream& out, const ValidationResult& result) {
  out << "mean_fom_ms,mean_online_ms,speedup\n"
      << format_double(result.mean_fom_ms) << ',' << format_double(result.mean_online_ms) << ','
      << format_double(result.speedup) << '\n';
}

nlohmann::json convergence_to_json(const std::vector<ConvergenceRow>& rows) {
  // NaN has no JSON literal; it becomes null.
  const auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"method", to_string(r.method)},
                   {"n", r.n},
                   {"mean_en_err", num(r.mean_energy_error)},
                   {"max_en_err", num(r.max_energy_error)},
                   {"mean_rel_err", num(r.mean_relative_error)},
                   {"max_rel_err", num(r.max_relative_error)},
                   {"mean_eta", num(r.mean_eta)},
                   {"max_eta", num(r.max_eta)},
                   {"mean_eff", num(r.mean_effectivity)},
                   {"min_eff", num(r.min_effectivity)},
                   {"max_eff", num(r.max_effectivity)},
                   {"mean_s_err", num(r.mean_output_error)},
                   {"max_s_err", num(r.max_output_error)}});
  }
  return out;
}

}  // namespace romkit

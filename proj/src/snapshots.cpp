#include "romkit/snapshots.hpp"

#include <cmath>
#include <regex>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"

namespace romkit {

namespace {

// Uniform spacing on [lo, hi] in the (possibly log) coordinate; endpoints exact.
std::vector<double> axis(std::size_t count, double lo, double hi, bool log_scale,
                         GridKind kind) {
  if (count == 0) fail(ErrorCode::invalid_argument, "grid axis needs at least one point");
  const double a = log_scale ? std::log(lo) : lo;
  const double b = log_scale ? std::log(hi) : hi;
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    double t;
    if (kind == GridKind::validation || count == 1) {
      t = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    } else {
      t = static_cast<double>(i) / static_cast<double>(count - 1);
    }
    const double c = a + t * (b - a);
    values[i] = log_scale ? std::exp(c) : c;
  }
  if (kind == GridKind::training && count > 1) {
    values.front() = lo;
    values.back() = hi;
  }
  return values;
}

}  // namespace

GridSpec GridSpec::parse(const std::string& text, GridKind kind) {
  static const std::regex pattern(R"(^\s*([0-9]+)\s*[xX]\s*([0-9]+)\s*$)");
  std::smatch match;
  if (!std::regex_match(text, match, pattern)) {
    fail(ErrorCode::invalid_argument, "grid spec must look like AxB, got '" + text + "'");
  }
  GridSpec spec;
  spec.n_mu0 = std::stoul(match[1]);
  spec.n_mu1 = std::stoul(match[2]);
  spec.kind = kind;
  if (spec.n_mu0 == 0 || spec.n_mu1 == 0) {
    fail(ErrorCode::invalid_argument, "grid spec must have positive counts, got '" + text + "'");
  }
  return spec;
}

std::string GridSpec::to_string() const {
  std::string s = std::to_string(n_mu0) + "x" + std::to_string(n_mu1);
  s += kind == GridKind::training ? " training" : " validation";
  if (fixed_mu0) s += " mu0=" + format_double(*fixed_mu0);
  return s;
}

std::vector<double> GridSpec::mu0_values() const {
  if (fixed_mu0) return {*fixed_mu0};
  return axis(n_mu0, parameter_box.mu0_min, parameter_box.mu0_max, true, kind);
}

std::vector<double> GridSpec::mu1_values() const {
  return axis(n_mu1, parameter_box.mu1_min, parameter_box.mu1_max, false, kind);
}

std::vector<ParameterPoint> GridSpec::points() const {
  std::vector<ParameterPoint> out;
  const auto mu1s = mu1_values();
  for (const double mu0 : mu0_values()) {
    for (const double mu1 : mu1s) out.push_back({mu0, mu1});
  }
  return out;
}

SnapshotSet generate_snapshots(const AffineSystem& sys, const std::vector<ParameterPoint>& points,
                               std::string provenance) {
  if (points.empty()) fail(ErrorCode::invalid_argument, "snapshot grid is empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) {
        fail(ErrorCode::invalid_argument, "snapshot parameters must be pairwise distinct");
      }
    }
  }
  SnapshotSet set;
  set.parameters = points;
  set.provenance = std::move(provenance);
  set.fields.resize(sys.free_count(), static_cast<Index>(points.size()));
  for (std::size_t m = 0; m < points.size(); ++m) {
    try {
      set.fields.col(static_cast<Index>(m)) = fom_solve(sys, points[m]).free_values;
    } catch (const Error& e) {
      fail(e.code(), "snapshot " + std::to_string(m) + " at mu = (" +
                         format_double(points[m].mu0) + ", " + format_double(points[m].mu1) +
                         "): " + e.what());
    }
  }
  return set;
}

SnapshotSet generate_snapshots(const AffineSystem& sys, const GridSpec& grid) {
  return generate_snapshots(sys, grid.points(), grid.to_string() + "; direct LDLT");
}

}  // namespace romkit

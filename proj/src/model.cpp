#include "romkit/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "romkit/error.hpp"

namespace romkit {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Number of POD modes above the rank cut-off used by pod().
std::size_t numerical_rank(const PodSpectrum& spectrum) {
  if (spectrum.eigenvalues.empty() || !(spectrum.eigenvalues.front() > 0.0)) return 0;
  const double cut = 1e-14 * spectrum.eigenvalues.front();
  return static_cast<std::size_t>(std::count_if(spectrum.eigenvalues.begin(),
                                                spectrum.eigenvalues.end(),
                                                [&](double l) { return l >= cut; }));
}

}  // namespace

std::string to_string(BasisMethod m) { return m == BasisMethod::greedy ? "greedy" : "pod"; }

BasisMethod parse_basis_method(const std::string& name) {
  if (name == "greedy") return BasisMethod::greedy;
  if (name == "pod") return BasisMethod::pod;
  fail(ErrorCode::invalid_argument, "unknown basis method '" + name + "' (greedy|pod)");
}

std::string to_string(OnlineMethod m) {
  switch (m) {
    case OnlineMethod::rb: return "rb";
    case OnlineMethod::pod_rbf: return "pod-rbf";
    case OnlineMethod::local_pod_rbf: return "local-pod-rbf";
    case OnlineMethod::pod_nn: return "pod-nn";
  }
  return "unknown";
}

std::optional<OnlineMethod> parse_online_method(const std::string& name) {
  for (const auto m : {OnlineMethod::rb, OnlineMethod::pod_rbf, OnlineMethod::local_pod_rbf,
                       OnlineMethod::pod_nn}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

bool ModelArtifacts::has_method(OnlineMethod m) const {
  switch (m) {
    case OnlineMethod::rb: return reduced.dim() > 0;
    case OnlineMethod::pod_rbf: return pod_rbf.has_value();
    case OnlineMethod::local_pod_rbf: return local_pod_rbf.has_value();
    case OnlineMethod::pod_nn: return pod_nn.has_value();
  }
  return false;
}

std::size_t ModelArtifacts::method_dim(OnlineMethod m) const {
  if (!has_method(m)) {
    fail(ErrorCode::invalid_argument, "method '" + to_string(m) + "' is not available in model '" +
                                          model_id + "'");
  }
  switch (m) {
    case OnlineMethod::rb: return reduced.dim();
    case OnlineMethod::pod_rbf: return pod_rbf->basis.dim();
    case OnlineMethod::local_pod_rbf: return local_pod_rbf->dim();
    case OnlineMethod::pod_nn: return pod_nn->basis.dim();
  }
  return 0;
}

std::vector<OnlineMethod> ModelArtifacts::methods() const {
  std::vector<OnlineMethod> out;
  for (const auto m : {OnlineMethod::rb, OnlineMethod::pod_rbf, OnlineMethod::local_pod_rbf,
                       OnlineMethod::pod_nn}) {
    if (has_method(m)) out.push_back(m);
  }
  return out;
}

OfflineResult run_offline(const OfflineSettings& settings, const std::string& model_id) {
  OfflineResult result;
  ModelArtifacts& art = result.artifacts;
  art.model_id = model_id;
  art.settings = settings;

  auto t0 = std::chrono::steady_clock::now();
  art.mesh = build_thermal_block_mesh(settings.refine);
  art.system = std::make_shared<const AffineSystem>(assemble_affine_system(art.mesh));
  result.timings.mesh_and_assembly = seconds_since(t0);
  const AffineSystem& sys = *art.system;
  const auto train = settings.train_grid.points();

  const bool need_snapshots = settings.method == BasisMethod::pod || !settings.surrogates.empty();
  if (need_snapshots) {
    t0 = std::chrono::steady_clock::now();
    art.snapshots = generate_snapshots(sys, train, "training " + settings.train_grid.to_string());
    result.timings.snapshots = seconds_since(t0);
  }

  t0 = std::chrono::steady_clock::now();
  if (settings.method == BasisMethod::greedy) {
    GreedyOptions options;
    options.tol = settings.tol;
    options.n_max = settings.n_max;
    options.relative = settings.relative_tol;
    GreedyResult g = greedy(sys, train, options);
    art.reduced = std::move(g.model);
    art.greedy_trace = std::move(g.trace);
  } else {
    PodSelection select = EnergyThreshold{settings.energy};
    if (settings.n) select = FixedDimension{*settings.n};
    PodResult p = pod(*art.snapshots, sys.gram_x(), select);
    art.reduced = project(sys, p.basis);
    art.spectrum = std::move(p.spectrum);
  }
  result.timings.basis = seconds_since(t0);

  if (settings.surrogates.empty()) return result;

  t0 = std::chrono::steady_clock::now();
  const auto wants = [&](OnlineMethod m) {
    return std::find(settings.surrogates.begin(), settings.surrogates.end(), m) !=
           settings.surrogates.end();
  };
  if (wants(OnlineMethod::pod_rbf) || wants(OnlineMethod::pod_nn)) {
    if (settings.method == BasisMethod::pod) {
      art.surrogate_basis = art.reduced.basis;
    } else {
      const PodSpectrum spectrum = pod_spectrum(art.snapshots->fields, sys.gram_x());
      const std::size_t n = std::min(art.reduced.dim(), numerical_rank(spectrum));
      art.surrogate_basis = pod(*art.snapshots, sys.gram_x(), FixedDimension{n}).basis;
    }
  }
  if (wants(OnlineMethod::pod_rbf)) {
    art.pod_rbf = podrbf_build(*art.snapshots, *art.surrogate_basis, sys.gram_x(), settings.kernel);
  }
  if (wants(OnlineMethod::local_pod_rbf)) {
    art.local_pod_rbf =
        local_podrbf_build(*art.snapshots, sys.gram_x(), settings.local_n, settings.kernel);
  }
  if (wants(OnlineMethod::pod_nn)) {
    art.pod_nn = podnn_build(*art.snapshots, *art.surrogate_basis, sys.gram_x(), settings.nn);
  }
  result.timings.surrogates = seconds_since(t0);
  return result;
}

double field_error_bound(const AffineSystem& sys, const ParameterPoint& mu,
                         const Eigen::VectorXd& free_values) {
  const Eigen::VectorXd r = sys.load_at(mu) - sys.operator_at(mu) * free_values;
  const double dual_sq = r.dot(sys.solve_gram(r));
  return std::sqrt(std::max(0.0, dual_sq)) / std::sqrt(alpha_lb(mu));
}

OnlineResult online_solve(const ModelArtifacts& model, OnlineMethod method,
                          const ParameterPoint& mu, std::size_t n) {
  check_admissible(mu);
  const std::size_t dim = model.method_dim(method);
  if (n < 1 || n > dim) {
    fail(ErrorCode::invalid_argument,
         "n = " + std::to_string(n) + " outside [1, " + std::to_string(dim) + "]");
  }
  OnlineResult out;
  out.method = method;
  out.n = n;
  const AffineSystem& sys = *model.system;

  if (method == OnlineMethod::rb) {
    const ReducedSolution rom = rom_solve(model.reduced, mu, n);
    out.online_ms = rom.wall_time * 1e3;
    out.free_values = model.reduced.basis.reconstruct(rom.coefficients);
    out.output_s = rom.output_s;
    out.eta_en = rom.eta_en;
    return out;
  }

  const auto start = std::chrono::steady_clock::now();
  SurrogatePrediction p;
  switch (method) {
    case OnlineMethod::pod_rbf: p = podrbf_predict(*model.pod_rbf, mu, n); break;
    case OnlineMethod::local_pod_rbf:
      p = local_podrbf_predict(*model.local_pod_rbf, sys.gram_x(), mu, n);
      break;
    case OnlineMethod::pod_nn: p = podnn_predict(*model.pod_nn, mu, n); break;
    case OnlineMethod::rb: break;
  }
  out.online_ms = seconds_since(start) * 1e3;
  out.free_values = std::move(p.free_values);
  out.extrapolated = p.extrapolated;
  out.warnings = std::move(p.warnings);
  out.output_s = sys.l_vec().dot(out.free_values);
  out.eta_en = field_error_bound(sys, mu, out.free_values);
  return out;
}

ErrorReport compare_with_fom(const AffineSystem& sys, const ParameterPoint& mu,
                             const OnlineResult& online, const FomSolution& fom) {
  const Eigen::VectorXd error = fom.free_values - online.free_values;
  ErrorReport report;
  report.mu = mu;
  report.n = online.n;
  report.v_norm_error = v_norm(sys, error);
  report.energy_norm_error = energy_norm(sys, mu, error);
  report.eta_en = online.eta_en;
  report.effectivity = report.energy_norm_error > effectivity_floor
                           ? report.eta_en / report.energy_norm_error
                           : std::numeric_limits<double>::quiet_NaN();
  const double fom_norm = v_norm(sys, fom.free_values);
  report.absolute_mode = fom_norm < 1e-14;
  report.relative_error =
      report.absolute_mode ? report.v_norm_error : report.v_norm_error / fom_norm;
  report.s_fom = fom.output_s;
  report.s_rom = online.output_s;
  report.output_error = std::abs(fom.output_s - online.output_s);
  return report;
}

}  // namespace romkit

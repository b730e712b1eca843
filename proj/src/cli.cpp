#include "romkit/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"
#include "romkit/package.hpp"
#include "romkit/server.hpp"
#include "romkit/validation.hpp"

namespace romkit {

namespace fs = std::filesystem;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return exit_argument;
    case ErrorCode::io_error:
    case ErrorCode::corrupt_package:
    case ErrorCode::version_error: return exit_io;
    default: return exit_numeric;
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

double parse_number(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') fail(ErrorCode::invalid_argument, what + ": bad number '" + text + "'");
  return v;
}

ParameterPoint parse_mu(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) fail(ErrorCode::invalid_argument, "--mu expects 'mu0,mu1', got '" + text + "'");
  const ParameterPoint mu{parse_number(parts[0], "--mu"), parse_number(parts[1], "--mu")};
  check_admissible(mu);
  return mu;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  return out;
}

void require_model_dir(const std::string& dir) {
  if (dir.empty()) fail(ErrorCode::invalid_argument, "no model directory: pass --model or set ROM_MODEL_DIR");
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

struct OfflineArgs {
  std::string model_dir;
  std::string id;
  int refine = 16;
  std::string train_grid = "10x10";
  std::string method = "greedy";
  double tol = 1e-5;
  std::size_t n_max = 20;
  bool relative_tol = false;
  double energy = 0.9999;
  std::size_t n = 0;
  double mu0_fixed = 0.0;
  std::string surrogates = "auto";
  std::string kernel = "tps";
  double epsilon = 0.0;
  std::size_t local_n = 0;
  std::uint64_t seed = 42;
  std::string nn_hidden = "16,16";
  std::size_t nn_epochs = 20000;
  double nn_lr = 0.2;
  std::string nn_activation = "tanh";
  std::string nn_preset;
  CLI::Option* n_opt = nullptr;
  CLI::Option* mu0_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
  CLI::Option* local_n_opt = nullptr;
};

int cmd_offline(const OfflineArgs& a, std::ostream& out, std::ostream& err) {
  require_model_dir(a.model_dir);
  OfflineSettings s;
  s.refine = a.refine;
  s.method = parse_basis_method(a.method);
  s.train_grid = GridSpec::parse(a.train_grid, GridKind::training);
  if (a.mu0_opt->count()) {
    if (!(a.mu0_fixed >= parameter_box.mu0_min && a.mu0_fixed <= parameter_box.mu0_max)) {
      fail(ErrorCode::invalid_argument, "--mu0-fixed outside [0.1, 10]");
    }
    s.train_grid.fixed_mu0 = a.mu0_fixed;
  }
  s.tol = a.tol;
  s.n_max = a.n_max;
  s.relative_tol = a.relative_tol;
  s.energy = a.energy;
  if (!(s.energy > 0.0 && s.energy <= 1.0)) fail(ErrorCode::invalid_argument, "--energy must be in (0, 1]");
  if (a.n_opt->count()) s.n = a.n;
  if (a.local_n_opt->count()) s.local_n = a.local_n;
  s.kernel.type = parse_kernel(a.kernel);
  if (a.eps_opt->count()) s.kernel.epsilon = a.epsilon;

  if (a.nn_preset == "cabg") {
    s.nn = PodNnConfig::cabg_preset();
  } else if (!a.nn_preset.empty()) {
    fail(ErrorCode::invalid_argument, "unknown --nn-preset '" + a.nn_preset + "'");
  } else {
    s.nn.hidden.clear();
    for (const auto& h : split(a.nn_hidden, ',')) {
      const double width = parse_number(h, "--nn-hidden");
      if (width < 1 || width != static_cast<double>(static_cast<std::size_t>(width))) {
        fail(ErrorCode::invalid_argument, "--nn-hidden expects positive integers");
      }
      s.nn.hidden.push_back(static_cast<std::size_t>(width));
    }
    s.nn.activation = parse_activation(a.nn_activation);
    s.nn.learning_rate = a.nn_lr;
  }
  s.nn.epochs = a.nn_epochs;
  s.nn.seed = a.seed;

  if (a.surrogates == "auto") {
    const auto& g = s.train_grid;
    if (!g.fixed_mu0 && g.n_mu0 >= 3 && g.n_mu1 >= 3) {
      s.surrogates = {OnlineMethod::pod_rbf, OnlineMethod::local_pod_rbf, OnlineMethod::pod_nn};
    } else {
      err << "note: training grid too small or degenerate for surrogates; skipping them\n";
    }
  } else if (a.surrogates != "none") {
    for (const auto& name : split(a.surrogates, ',')) {
      const auto m = parse_online_method(name);
      if (!m || *m == OnlineMethod::rb) {
        fail(ErrorCode::invalid_argument, "unknown surrogate '" + name + "' (pod-rbf|local-pod-rbf|pod-nn)");
      }
      s.surrogates.push_back(*m);
    }
  }

  const fs::path dir(a.model_dir);
  const std::string id = a.id.empty() ? fs::absolute(dir).lexically_normal().filename().string() : a.id;
  const OfflineResult result = run_offline(s, id.empty() ? "model" : id);
  const ModelArtifacts& m = result.artifacts;
  save_package(dir, m);

  out << "model " << m.model_id << " -> " << dir.string() << '\n';
  out << "mesh: refine " << m.mesh.refine << ", " << m.mesh.node_count() << " nodes, "
      << m.mesh.cell_count() << " cells, " << m.system->free_count() << " unknowns\n";
  out << "basis: " << to_string(s.method) << ", N = " << m.reduced.dim() << '\n';
  if (m.greedy_trace) {
    const auto& t = *m.greedy_trace;
    out << "greedy trace (tol " << sci(t.final_tol) << "):\n";
    out << "  iter        mu0        mu1     max_eta\n";
    for (std::size_t k = 0; k < t.selected_parameters.size(); ++k) {
      char line[128];
      std::snprintf(line, sizeof line, "  %4zu %10.5f %10.5f  %s\n", k + 1,
                    t.selected_parameters[k].mu0, t.selected_parameters[k].mu1,
                    sci(t.max_eta_history[k]).c_str());
      out << line;
    }
    out << "max eta: " << sci(t.max_eta_history.back()) << (t.converged ? " (converged)" : " (not converged)")
        << '\n';
  }
  if (m.spectrum) {
    const auto& sp = *m.spectrum;
    out << "pod energy captured: " << fixed(sp.cumulative_energy[m.reduced.dim() - 1], 12) << '\n';
  }
  for (const auto method : m.methods()) {
    if (method != OnlineMethod::rb) out << "surrogate " << to_string(method) << ": N = " << m.method_dim(method) << '\n';
  }
  const auto& tm = result.timings;
  out << "timings [s]: assembly " << fixed(tm.mesh_and_assembly, 3) << ", snapshots "
      << fixed(tm.snapshots, 3) << ", basis " << fixed(tm.basis, 3) << ", surrogates "
      << fixed(tm.surrogates, 3) << '\n';
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  return exit_ok;
}

struct SolveArgs {
  std::string model_dir;
  std::string mu;
  std::size_t n = 0;
  std::string method = "rb";
  bool compare_fom = false;
  std::string output = "field.csv";
  std::string report = "report.csv";
  CLI::Option* n_opt = nullptr;
};

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  require_model_dir(a.model_dir);
  const ParameterPoint mu = parse_mu(a.mu);
  const auto method = parse_online_method(a.method);
  if (!method) fail(ErrorCode::invalid_argument, "unknown method '" + a.method + "'");
  const ModelArtifacts m = load_package(a.model_dir);
  const std::size_t n = a.n_opt->count() ? a.n : m.method_dim(*method);
  const AffineSystem& sys = *m.system;

  const OnlineResult online = online_solve(m, *method, mu, n);
  for (const auto& w : online.warnings) err << "warning: " << w << '\n';
  {
    auto file = open_output(a.output);
    write_field_csv(file, m.mesh, sys.expand(online.free_values));
  }
  auto report = open_output(a.report);
  out << "method " << to_string(*method) << ", mu = (" << format_double(mu.mu0) << ", "
      << format_double(mu.mu1) << "), n = " << n << '\n';
  out << "s = " << format_double(online.output_s)
      << ", s_average = " << format_double(online.output_s / sys.base_length()) << '\n';
  out << "eta_en = " << format_double(online.eta_en) << '\n';
  out << "online time: " << fixed(online.online_ms, 4) << " ms\n";
  if (a.compare_fom) {
    const FomSolution fom = fom_solve(sys, mu);
    const ErrorReport r = compare_with_fom(sys, mu, online, fom);
    report << "method,";
    write_error_report_header(report);
    report << to_string(*method) << ',';
    write_error_report_row(report, r);
    out << "fom time: " << fixed(fom.wall_time * 1e3, 4) << " ms\n";
    out << "energy error = " << format_double(r.energy_norm_error)
        << ", effectivity = " << format_double(r.effectivity) << '\n';
    out << "relative V error = " << format_double(r.relative_error)
        << ", |s_fom - s| = " << format_double(r.output_error) << '\n';
  } else {
    report << "method,mu0,mu1,n,s,s_average,eta\n"
           << to_string(*method) << ',' << format_double(mu.mu0) << ',' << format_double(mu.mu1)
           << ',' << n << ',' << format_double(online.output_s) << ','
           << format_double(online.output_s / sys.base_length()) << ','
           << format_double(online.eta_en) << '\n';
  }
  return exit_ok;
}

std::vector<OnlineMethod> parse_method_list(const std::string& text, const ModelArtifacts& m) {
  if (text == "all") return m.methods();
  std::vector<OnlineMethod> methods;
  for (const auto& name : split(text, ',')) {
    const auto method = parse_online_method(name);
    if (!method) fail(ErrorCode::invalid_argument, "unknown method '" + name + "'");
    methods.push_back(*method);
  }
  return methods;
}

struct ValidateArgs {
  std::string model_dir;
  std::string grid = "10x10";
  std::string methods = "rb";
  std::string output_dir = ".";
};

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream&) {
  require_model_dir(a.model_dir);
  const GridSpec grid = GridSpec::parse(a.grid, GridKind::validation);
  const ModelArtifacts m = load_package(a.model_dir);
  const ValidationResult v = run_validation(m, grid, parse_method_list(a.methods, m));

  const fs::path dir(a.output_dir);
  {
    auto f = open_output(dir / "report.csv");
    write_validation_report_csv(f, v);
  }
  {
    auto f = open_output(dir / "convergence.csv");
    write_convergence_csv(f, v.rows);
  }
  {
    auto f = open_output(dir / "timing.csv");
    write_timing_csv(f, v);
  }
  out << "validation grid " << grid.to_string() << " (" << grid.size() << " points)\n";
  out << "  method          n  mean_en_err  max_en_err   mean_eta     mean_eff\n";
  for (const auto& r : v.rows) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-14s %2zu  %s  %s  %s  %s\n", to_string(r.method).c_str(), r.n,
                  sci(r.mean_energy_error).c_str(), sci(r.max_energy_error).c_str(),
                  sci(r.mean_eta).c_str(), sci(r.mean_effectivity).c_str());
    out << line;
  }
  out << "mean FOM " << fixed(v.mean_fom_ms, 4) << " ms, mean RB " << fixed(v.mean_online_ms, 4)
      << " ms, speed-up " << fixed(v.speedup, 1) << '\n';
  return exit_ok;
}

struct CompareArgs {
  std::string model_dir;
  std::string grid = "10x10";
  std::string output = "compare.csv";
  std::string energy_output = "energy_dims.csv";
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  require_model_dir(a.model_dir);
  const GridSpec grid = GridSpec::parse(a.grid, GridKind::validation);
  const ModelArtifacts m = load_package(a.model_dir);
  const AffineSystem& sys = *m.system;
  const auto methods = m.methods();
  if (methods.size() < 2) err << "warning: model has no surrogates; only rb is compared\n";

  auto csv = open_output(a.output);
  csv << "method,mu0,mu1,rel_err,online_ms\n";
  std::map<OnlineMethod, std::pair<double, std::size_t>> totals;
  for (const auto& mu : grid.points()) {
    const FomSolution fom = fom_solve(sys, mu);
    for (const auto method : methods) {
      const OnlineResult online = online_solve(m, method, mu, m.method_dim(method));
      const ErrorReport r = compare_with_fom(sys, mu, online, fom);
      csv << to_string(method) << ',' << format_double(mu.mu0) << ',' << format_double(mu.mu1)
          << ',' << format_double(r.relative_error) << ',' << format_double(online.online_ms) << '\n';
      totals[method].first += r.relative_error;
      ++totals[method].second;
    }
  }
  for (const auto method : methods) {
    const auto& [sum, count] = totals[method];
    out << to_string(method) << ": N = " << m.method_dim(method) << ", mean relative V error "
        << sci(sum / static_cast<double>(count)) << '\n';
  }

  if (!m.snapshots) {
    err << "warning: package has no training snapshots; skipping per-anchor energy dimensions\n";
    return exit_ok;
  }
  const std::size_t global_n = pod_spectrum(m.snapshots->fields, sys.gram_x())
                                   .dimension_for_energy(local_energy_threshold);
  std::vector<double> anchors;
  for (const auto& p : m.snapshots->parameters) anchors.push_back(p.mu0);
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  const auto local = local_energy_dimensions(*m.snapshots, sys.gram_x());
  auto energy = open_output(a.energy_output);
  energy << "anchor_mu0,local_n,global_n\n";
  std::size_t worst = 0;
  for (std::size_t k = 0; k < local.size(); ++k) {
    energy << format_double(anchors[k]) << ',' << local[k] << ',' << global_n << '\n';
    worst = std::max(worst, local[k]);
  }
  out << "99.99% energy: global POD N = " << global_n << ", largest per-anchor N = " << worst << '\n';
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reduced-order modelling of a parametric thermal block", "romkit"};
  app.require_subcommand(1);

  OfflineArgs off;
  auto* offline = app.add_subcommand("offline", "Build a model package (mesh, basis, surrogates)");
  offline->add_option("--model", off.model_dir, "Package directory")->envname("ROM_MODEL_DIR");
  offline->add_option("--id", off.id, "Model id (default: directory name)");
  offline->add_option("--refine", off.refine, "Mesh refinement (squares per unit edge pair)")
      ->check(CLI::Range(2, 4096));
  offline->add_option("--train-grid", off.train_grid, "Training grid AxB");
  offline->add_option("--method", off.method, "Basis construction")->check(CLI::IsMember({"greedy", "pod"}));
  offline->add_option("--tol", off.tol, "Greedy tolerance on eta")->check(CLI::PositiveNumber);
  offline->add_option("--n-max", off.n_max, "Greedy dimension cap")->check(CLI::Range(1, 1000));
  offline->add_flag("--relative-tol", off.relative_tol, "Greedy on eta / ||u_rb||_mu");
  offline->add_option("--energy", off.energy, "POD energy fraction");
  off.n_opt = offline->add_option("--n", off.n, "Fixed POD dimension")->check(CLI::Range(1, 100000));
  off.mu0_opt = offline->add_option("--mu0-fixed", off.mu0_fixed, "Train on a mu1-only sweep at this mu0");
  offline->add_option("--surrogates", off.surrogates, "auto, none, or a list of pod-rbf,local-pod-rbf,pod-nn");
  offline->add_option("--kernel", off.kernel, "RBF kernel: tps, gaussian, multiquadric");
  off.eps_opt = offline->add_option("--epsilon", off.epsilon, "RBF shape length")->check(CLI::PositiveNumber);
  off.local_n_opt = offline->add_option("--local-n", off.local_n, "Local POD-RBF dimension")->check(CLI::Range(1, 100000));
  offline->add_option("--seed", off.seed, "Seed for network initialisation");
  offline->add_option("--nn-hidden", off.nn_hidden, "Hidden layer widths, e.g. 16,16");
  offline->add_option("--nn-epochs", off.nn_epochs, "Training epochs");
  offline->add_option("--nn-lr", off.nn_lr, "Learning rate")->check(CLI::PositiveNumber);
  offline->add_option("--nn-activation", off.nn_activation, "tanh, relu or sigmoid");
  offline->add_option("--nn-preset", off.nn_preset, "Named architecture (cabg)");

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "Online solve at one parameter point");
  solve->add_option("--model", sol.model_dir, "Package directory")->envname("ROM_MODEL_DIR");
  solve->add_option("--mu", sol.mu, "Parameter pair mu0,mu1")->required();
  sol.n_opt = solve->add_option("--n", sol.n, "Number of modes (default: all)");
  solve->add_option("--method", sol.method, "rb, pod-rbf, local-pod-rbf or pod-nn");
  solve->add_flag("--compare-fom", sol.compare_fom, "Also run the full-order solve");
  solve->add_option("--output", sol.output, "Field CSV");
  solve->add_option("--report", sol.report, "Report CSV");

  ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "Error and estimator sweep over a validation grid");
  validate->add_option("--model", val.model_dir, "Package directory")->envname("ROM_MODEL_DIR");
  validate->add_option("--grid", val.grid, "Validation grid AxB");
  validate->add_option("--methods", val.methods, "Comma list of methods or 'all'");
  validate->add_option("--output-dir", val.output_dir, "Directory for report, convergence and timing CSVs");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare-surrogates", "Side-by-side surrogate errors");
  compare->add_option("--model", cmp.model_dir, "Package directory")->envname("ROM_MODEL_DIR");
  compare->add_option("--grid", cmp.grid, "Validation grid AxB");
  compare->add_option("--output", cmp.output, "Comparison CSV");
  compare->add_option("--energy-output", cmp.energy_output, "Per-anchor energy dimension CSV");

  ServerOptions srv;
  std::string models_dir;
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "HTTP service over a directory of packages");
  serve->add_option("--port", srv.port, "Port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", srv.host, "Bind address");
  serve->add_option("--models", models_dir, "Package or directory of packages")->envname("ROM_MODEL_DIR");
  serve->add_option("--cors-origin", srv.cors_origin, "Allowed CORS origin");
  serve->add_option("--static", static_dir, "Static bundle served at /");

  std::vector<std::string> storage{"romkit"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_argument;
  }

  try {
    if (*offline) return cmd_offline(off, out, err);
    if (*solve) return cmd_solve(sol, out, err);
    if (*validate) return cmd_validate(val, out, err);
    if (*compare) return cmd_compare(cmp, out, err);
    if (*serve) {
      require_model_dir(models_dir);
      srv.models_dir = models_dir;
      if (!static_dir.empty()) srv.static_dir = static_dir;
      return run_server(srv);
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error (io): " << e.what() << '\n';
    return exit_io;
  }
  return exit_argument;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace romkit

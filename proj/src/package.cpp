#include "romkit/package.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"
#include "romkit/romx.hpp"

namespace romkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
}

std::string to_string(GreedyStop s) {
  switch (s) {
    case GreedyStop::tolerance: return "tolerance";
    case GreedyStop::max_dimension: return "max-dimension";
    case GreedyStop::dependent_snapshot: return "dependent-snapshot";
  }
  return "unknown";
}

GreedyStop parse_greedy_stop(const std::string& s) {
  if (s == "tolerance") return GreedyStop::tolerance;
  if (s == "max-dimension") return GreedyStop::max_dimension;
  if (s == "dependent-snapshot") return GreedyStop::dependent_snapshot;
  fail(ErrorCode::corrupt_package, "manifest.json: unknown greedy stop '" + s + "'");
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

json settings_to_json(const OfflineSettings& s) {
  json surrogates = json::array();
  for (const auto m : s.surrogates) surrogates.push_back(to_string(m));
  return {{"refine", s.refine},
          {"method", to_string(s.method)},
          {"train_grid", std::to_string(s.train_grid.n_mu0) + "x" + std::to_string(s.train_grid.n_mu1)},
          {"fixed_mu0", optional_json(s.train_grid.fixed_mu0)},
          {"tol", s.tol},
          {"n_max", s.n_max},
          {"relative_tol", s.relative_tol},
          {"n", optional_json(s.n)},
          {"energy", s.energy},
          {"surrogates", surrogates},
          {"kernel", {{"type", to_string(s.kernel.type)}, {"epsilon", optional_json(s.kernel.epsilon)}}},
          {"local_n", optional_json(s.local_n)},
          {"nn",
           {{"hidden", s.nn.hidden},
            {"activation", to_string(s.nn.activation)},
            {"learning_rate", s.nn.learning_rate},
            {"epochs", s.nn.epochs},
            {"seed", s.nn.seed}}}};
}

OfflineSettings settings_from_json(const json& j) {
  OfflineSettings s;
  s.refine = j.at("refine").get<int>();
  s.method = parse_basis_method(j.at("method").get<std::string>());
  s.train_grid = GridSpec::parse(j.at("train_grid").get<std::string>());
  s.train_grid.fixed_mu0 = optional_from<double>(j.at("fixed_mu0"));
  s.tol = j.at("tol").get<double>();
  s.n_max = j.at("n_max").get<std::size_t>();
  s.relative_tol = j.at("relative_tol").get<bool>();
  s.n = optional_from<std::size_t>(j.at("n"));
  s.energy = j.at("energy").get<double>();
  for (const auto& name : j.at("surrogates")) {
    const auto m = parse_online_method(name.get<std::string>());
    if (!m) fail(ErrorCode::corrupt_package, "manifest.json: unknown surrogate " + name.dump());
    s.surrogates.push_back(*m);
  }
  s.kernel.type = parse_kernel(j.at("kernel").at("type").get<std::string>());
  s.kernel.epsilon = optional_from<double>(j.at("kernel").at("epsilon"));
  s.local_n = optional_from<std::size_t>(j.at("local_n"));
  const json& nn = j.at("nn");
  s.nn.hidden = nn.at("hidden").get<std::vector<std::size_t>>();
  s.nn.activation = parse_activation(nn.at("activation").get<std::string>());
  s.nn.learning_rate = nn.at("learning_rate").get<double>();
  s.nn.epochs = nn.at("epochs").get<std::size_t>();
  s.nn.seed = nn.at("seed").get<std::uint64_t>();
  return s;
}

json scaler_to_json(const ParameterScaler& s) {
  return {{"log_mu0", {s.log_mu0_min, s.log_mu0_max}}, {"mu1", {s.mu1_min, s.mu1_max}}};
}

ParameterScaler scaler_from_json(const json& j) {
  ParameterScaler s;
  s.log_mu0_min = j.at("log_mu0").at(0).get<double>();
  s.log_mu0_max = j.at("log_mu0").at(1).get<double>();
  s.mu1_min = j.at("mu1").at(0).get<double>();
  s.mu1_max = j.at("mu1").at(1).get<double>();
  return s;
}

Eigen::MatrixXd parameters_matrix(const std::vector<ParameterPoint>& points) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(points.size()), 2);
  for (std::size_t k = 0; k < points.size(); ++k) {
    m(static_cast<Eigen::Index>(k), 0) = points[k].mu0;
    m(static_cast<Eigen::Index>(k), 1) = points[k].mu1;
  }
  return m;
}

std::vector<ParameterPoint> parameters_from(const Eigen::MatrixXd& m, const std::string& name) {
  if (m.cols() != 2) fail(ErrorCode::corrupt_package, name + ": expected two columns");
  std::vector<ParameterPoint> points;
  for (Eigen::Index k = 0; k < m.rows(); ++k) points.push_back({m(k, 0), m(k, 1)});
  return points;
}

// Numeric CSV body (header skipped); every row must have `cols` fields.
std::vector<std::vector<double>> parse_csv(const std::string& text, std::size_t cols,
                                           const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::corrupt_package, name + ": missing header");
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      char* end = nullptr;
      row.push_back(std::strtod(field.c_str(), &end));
      if (end == field.c_str() || *end != '\0') {
        fail(ErrorCode::corrupt_package, name + ": bad number '" + field + "'");
      }
    }
    if (row.size() != cols) fail(ErrorCode::corrupt_package, name + ": wrong column count");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string loss_csv(const std::vector<double>& history) {
  std::ostringstream out;
  out << "epoch,mse\n";
  for (std::size_t e = 0; e < history.size(); ++e) out << e << ',' << format_double(history[e]) << '\n';
  return out.str();
}

class PackageWriter {
 public:
  void add(const std::string& rel, std::string bytes) { files_[rel] = std::move(bytes); }
  void add(const std::string& rel, const Eigen::MatrixXd& m) { add(rel, encode_romx(m)); }
  void add(const std::string& rel, const SparseOperator& s) { add(rel, encode_romx(s)); }

  void add_rbf(const std::string& dir, const RbfInterpolant& r, json& meta) {
    add(dir + "/centers.romx", r.centers());
    add(dir + "/weights.romx", r.weights());
    add(dir + "/poly.romx", r.poly());
    meta = {{"type", to_string(r.kernel().type)},
            {"epsilon", r.kernel().epsilon},
            {"warnings", r.warnings()}};
  }

  json inventory() const {
    json files = json::object();
    for (const auto& [rel, bytes] : files_) {
      files[rel] = {{"fnv1a64", hash_hex(fnv1a64(bytes))}, {"bytes", bytes.size()}};
    }
    return files;
  }

  void write_all(const fs::path& root) const {
    for (const auto& [rel, bytes] : files_) write_file(root / rel, bytes);
  }

 private:
  std::map<std::string, std::string> files_;
};

class PackageReader {
 public:
  PackageReader(fs::path root, const json& files) : root_(std::move(root)) {
    for (const auto& [rel, entry] : files.items()) {
      const fs::path path = root_ / rel;
      std::string bytes;
      try {
        bytes = read_file(path);
      } catch (const Error&) {
        fail(ErrorCode::corrupt_package, rel + ": listed in manifest but missing");
      }
      if (bytes.size() != entry.at("bytes").get<std::size_t>() ||
          hash_hex(fnv1a64(bytes)) != entry.at("fnv1a64").get<std::string>()) {
        fail(ErrorCode::corrupt_package, rel + ": content hash mismatch");
      }
      files_[rel] = std::move(bytes);
    }
  }

  bool has(const std::string& rel) const { return files_.count(rel) > 0; }

  const std::string& bytes(const std::string& rel) const {
    const auto it = files_.find(rel);
    if (it == files_.end()) fail(ErrorCode::corrupt_package, rel + ": not in manifest inventory");
    return it->second;
  }

  Eigen::MatrixXd dense(const std::string& rel) const { return decode_romx_dense(bytes(rel), rel); }
  SparseOperator sparse(const std::string& rel) const { return decode_romx_sparse(bytes(rel), rel); }

  Eigen::VectorXd vector(const std::string& rel) const {
    const Eigen::MatrixXd m = dense(rel);
    if (m.cols() != 1) fail(ErrorCode::corrupt_package, rel + ": expected a column vector");
    return m.col(0);
  }

  RbfInterpolant rbf(const std::string& dir, const json& meta) const {
    RbfKernel kernel{parse_kernel(meta.at("type").get<std::string>()),
                     meta.at("epsilon").get<double>()};
    RbfInterpolant r(dense(dir + "/centers.romx"), dense(dir + "/weights.romx"),
                     dense(dir + "/poly.romx"), kernel);
    for (const auto& w : meta.at("warnings")) r.add_warning(w.get<std::string>());
    return r;
  }

 private:
  fs::path root_;
  std::map<std::string, std::string> files_;
};

Eigen::MatrixXd as_column(const Eigen::VectorXd& v) { return v; }

}  // namespace

json read_manifest(const fs::path& root) {
  const fs::path path = root / "manifest.json";
  if (!fs::exists(path)) fail(ErrorCode::io_error, "no manifest.json in " + root.string());
  json manifest;
  try {
    manifest = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::corrupt_package, std::string("manifest.json: ") + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("format_version")) {
    fail(ErrorCode::corrupt_package, "manifest.json: missing format_version");
  }
  const json& v = manifest.at("format_version");
  if (!v.is_number_integer() || v.get<int>() != package_format_version) {
    fail(ErrorCode::version_error, "manifest.json: unsupported format_version " + v.dump());
  }
  return manifest;
}

json save_package(const fs::path& root, const ModelArtifacts& model) {
  if (!model.system) fail(ErrorCode::invalid_argument, "save_package: model has no system");
  const AffineSystem& sys = *model.system;
  PackageWriter w;
  json manifest;
  manifest["format_version"] = package_format_version;
  manifest["model_id"] = model.model_id;
  manifest["mesh"] = {{"refine", model.mesh.refine},
                      {"nodes", model.mesh.node_count()},
                      {"cells", model.mesh.cell_count()},
                      {"free_nodes", sys.free_count()}};
  manifest["parameter_box"] = {{"mu0", {parameter_box.mu0_min, parameter_box.mu0_max}},
                               {"mu1", {parameter_box.mu1_min, parameter_box.mu1_max}}};
  manifest["offline"] = settings_to_json(model.settings);
  manifest["basis"] = {{"method", to_string(model.settings.method)}, {"dim", model.reduced.dim()}};

  w.add("mesh.json", mesh_to_json(model.mesh).dump());
  for (std::size_t q = 0; q < sys.a_ops().size(); ++q) {
    w.add("ops/A" + std::to_string(q) + ".romx", sys.a_ops()[q]);
  }
  for (std::size_t q = 0; q < sys.f_vecs().size(); ++q) {
    w.add("ops/f" + std::to_string(q) + ".romx", as_column(sys.f_vecs()[q]));
  }
  w.add("ops/X.romx", sys.gram_x());

  w.add("basis/XI.romx", model.reduced.basis.vectors);
  for (std::size_t q = 0; q < model.reduced.a_rb.size(); ++q) {
    w.add("reduced/A" + std::to_string(q) + ".romx", model.reduced.a_rb[q]);
  }
  for (std::size_t q = 0; q < model.reduced.f_rb.size(); ++q) {
    w.add("reduced/f" + std::to_string(q) + ".romx", as_column(model.reduced.f_rb[q]));
  }
  w.add("reduced/l.romx", as_column(model.reduced.l_rb));
  w.add("reduced/residual.romx", model.reduced.residual_factor);

  if (model.snapshots) {
    w.add("snapshots/S.romx", model.snapshots->fields);
    w.add("snapshots/parameters.romx", parameters_matrix(model.snapshots->parameters));
    manifest["snapshots"] = {{"count", model.snapshots->size()},
                             {"provenance", model.snapshots->provenance}};
  }
  if (model.greedy_trace) {
    std::ostringstream csv;
    write_greedy_trace_csv(csv, *model.greedy_trace);
    w.add("traces/greedy.csv", csv.str());
    manifest["greedy"] = {{"converged", model.greedy_trace->converged},
                          {"stop", to_string(model.greedy_trace->stop)},
                          {"final_tol", model.greedy_trace->final_tol}};
  }
  if (model.spectrum) {
    std::ostringstream csv;
    write_spectrum_csv(csv, *model.spectrum);
    w.add("traces/spectrum.csv", csv.str());
  }

  json surrogates = json::object();
  if (model.surrogate_basis) w.add("surrogates/XI_pod.romx", model.surrogate_basis->vectors);
  if (model.pod_rbf) {
    json meta;
    w.add_rbf("surrogates/pod_rbf", model.pod_rbf->interpolant, meta);
    surrogates["pod-rbf"] = {{"scaler", scaler_to_json(model.pod_rbf->scaler)}, {"kernel", meta}};
  }
  if (model.local_pod_rbf) {
    const LocalBasisFamily& f = *model.local_pod_rbf;
    const std::string dir = "surrogates/local_pod_rbf";
    Eigen::MatrixXd bases(sys.free_count(),
                          static_cast<Eigen::Index>(f.anchor_bases.size() * f.dim()));
    for (std::size_t a = 0; a < f.anchor_bases.size(); ++a) {
      bases.middleCols(static_cast<Eigen::Index>(a * f.dim()), static_cast<Eigen::Index>(f.dim())) =
          f.anchor_bases[a].vectors;
    }
    w.add(dir + "/anchors.romx",
          as_column(Eigen::Map<const Eigen::VectorXd>(f.anchor_values.data(),
                                                      static_cast<Eigen::Index>(f.anchor_values.size()))));
    w.add(dir + "/bases.romx", bases);
    w.add(dir + "/coefficients.romx", f.local_coefficients.coefficients);
    w.add(dir + "/parameters.romx", parameters_matrix(f.local_coefficients.parameters));
    json basis_meta;
    json coeff_meta;
    w.add_rbf(dir + "/basis_rbf", f.basis_interpolant, basis_meta);
    w.add_rbf(dir + "/coeff_rbf", f.coeff_interpolant, coeff_meta);
    surrogates["local-pod-rbf"] = {{"scaler", scaler_to_json(f.scaler)},
                                   {"dim", f.dim()},
                                   {"basis_kernel", basis_meta},
                                   {"coeff_kernel", coeff_meta}};
  }
  if (model.pod_nn) {
    const PodNnSurrogate& s = *model.pod_nn;
    const std::string dir = "surrogates/pod_nn";
    for (std::size_t l = 0; l < s.net.weights.size(); ++l) {
      w.add(dir + "/W" + std::to_string(l) + ".romx", s.net.weights[l]);
      w.add(dir + "/b" + std::to_string(l) + ".romx", as_column(s.net.biases[l]));
    }
    w.add(dir + "/coeff_mean.romx", as_column(s.coeff_mean));
    w.add(dir + "/coeff_scale.romx", as_column(s.coeff_scale));
    w.add(dir + "/loss.csv", loss_csv(s.loss_history));
    surrogates["pod-nn"] = {{"scaler", scaler_to_json(s.scaler)},
                            {"layer_sizes", s.net.layer_sizes},
                            {"activation", to_string(s.net.activation)},
                            {"learning_rate", s.net.learning_rate}};
  }
  manifest["surrogates"] = surrogates;
  manifest["files"] = w.inventory();

  const fs::path manifest_path = root / "manifest.json";
  fs::create_directories(root);
  fs::remove(manifest_path);
  w.write_all(root);
  const fs::path tmp = root / "manifest.json.tmp";
  write_file(tmp, manifest.dump(2) + "\n");
  fs::rename(tmp, manifest_path);
  return manifest;
}

ModelArtifacts load_package(const fs::path& root) {
  const json manifest = read_manifest(root);
  try {
    const PackageReader r(root, manifest.at("files"));
    ModelArtifacts model;
    model.model_id = manifest.at("model_id").get<std::string>();
    model.settings = settings_from_json(manifest.at("offline"));

    json mesh_doc;
    try {
      mesh_doc = json::parse(r.bytes("mesh.json"));
      model.mesh = mesh_from_json(mesh_doc);
    } catch (const std::exception& e) {
      fail(ErrorCode::corrupt_package, std::string("mesh.json: ") + e.what());
    }

    std::vector<SparseOperator> a_ops;
    for (std::size_t q = 0; q < q_a; ++q) a_ops.push_back(r.sparse("ops/A" + std::to_string(q) + ".romx"));
    std::vector<Eigen::VectorXd> f_vecs;
    for (std::size_t q = 0; q < q_f; ++q) f_vecs.push_back(r.vector("ops/f" + std::to_string(q) + ".romx"));
    try {
      model.system = std::make_shared<const AffineSystem>(
          std::move(a_ops), std::move(f_vecs), r.sparse("ops/X.romx"), model.mesh.free_nodes,
          model.mesh.node_count());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::corrupt_package) throw;
      fail(ErrorCode::corrupt_package, std::string("ops: ") + e.what());
    }

    model.reduced.basis.vectors = r.dense("basis/XI.romx");
    for (std::size_t q = 0; q < q_a; ++q) {
      model.reduced.a_rb.push_back(r.dense("reduced/A" + std::to_string(q) + ".romx"));
    }
    for (std::size_t q = 0; q < q_f; ++q) {
      model.reduced.f_rb.push_back(r.vector("reduced/f" + std::to_string(q) + ".romx"));
    }
    model.reduced.l_rb = r.vector("reduced/l.romx");
    model.reduced.residual_factor = r.dense("reduced/residual.romx");
    const auto n = static_cast<Eigen::Index>(model.reduced.dim());
    const auto k = static_cast<Eigen::Index>(ReducedModel::residual_size(model.reduced.dim()));
    bool shapes_ok = model.reduced.basis.vectors.rows() == model.system->free_count() &&
                     model.reduced.l_rb.size() == n && model.reduced.f_rb[0].size() == n &&
                     model.reduced.residual_factor.rows() == k &&
                     model.reduced.residual_factor.cols() == k;
    for (const auto& a : model.reduced.a_rb) shapes_ok = shapes_ok && a.rows() == n && a.cols() == n;
    if (!shapes_ok) fail(ErrorCode::corrupt_package, "reduced: inconsistent block shapes");

    if (manifest.contains("snapshots")) {
      SnapshotSet s;
      s.fields = r.dense("snapshots/S.romx");
      s.parameters = parameters_from(r.dense("snapshots/parameters.romx"), "snapshots/parameters.romx");
      s.provenance = manifest.at("snapshots").at("provenance").get<std::string>();
      model.snapshots = std::move(s);
    }
    if (manifest.contains("greedy")) {
      GreedyTrace t;
      for (const auto& row : parse_csv(r.bytes("traces/greedy.csv"), 4, "traces/greedy.csv")) {
        t.selected_parameters.push_back({row[1], row[2]});
        t.max_eta_history.push_back(row[3]);
      }
      const json& g = manifest.at("greedy");
      t.converged = g.at("converged").get<bool>();
      t.stop = parse_greedy_stop(g.at("stop").get<std::string>());
      t.final_tol = g.at("final_tol").get<double>();
      model.greedy_trace = std::move(t);
    }
    if (r.has("traces/spectrum.csv")) {
      PodSpectrum sp;
      for (const auto& row : parse_csv(r.bytes("traces/spectrum.csv"), 3, "traces/spectrum.csv")) {
        sp.eigenvalues.push_back(row[1]);
        sp.cumulative_energy.push_back(row[2]);
      }
      model.spectrum = std::move(sp);
    }

    const json& surrogates = manifest.at("surrogates");
    if (r.has("surrogates/XI_pod.romx")) {
      model.surrogate_basis = ReducedBasis{r.dense("surrogates/XI_pod.romx")};
    }
    if (surrogates.contains("pod-rbf")) {
      const json& meta = surrogates.at("pod-rbf");
      PodRbfSurrogate s;
      s.scaler = scaler_from_json(meta.at("scaler"));
      s.basis = model.surrogate_basis.value();
      s.interpolant = r.rbf("surrogates/pod_rbf", meta.at("kernel"));
      model.pod_rbf = std::move(s);
    }
    if (surrogates.contains("local-pod-rbf")) {
      const json& meta = surrogates.at("local-pod-rbf");
      const std::string dir = "surrogates/local_pod_rbf";
      LocalBasisFamily f;
      f.scaler = scaler_from_json(meta.at("scaler"));
      const auto dim = meta.at("dim").get<Eigen::Index>();
      const Eigen::VectorXd anchors = r.vector(dir + "/anchors.romx");
      const Eigen::MatrixXd bases = r.dense(dir + "/bases.romx");
      if (dim < 1 || bases.cols() != anchors.size() * dim) {
        fail(ErrorCode::corrupt_package, dir + "/bases.romx: shape disagrees with anchors");
      }
      for (Eigen::Index a = 0; a < anchors.size(); ++a) {
        f.anchor_values.push_back(anchors[a]);
        f.anchor_bases.push_back(ReducedBasis{bases.middleCols(a * dim, dim)});
      }
      f.local_coefficients.coefficients = r.dense(dir + "/coefficients.romx");
      f.local_coefficients.parameters =
          parameters_from(r.dense(dir + "/parameters.romx"), dir + "/parameters.romx");
      f.basis_interpolant = r.rbf(dir + "/basis_rbf", meta.at("basis_kernel"));
      f.coeff_interpolant = r.rbf(dir + "/coeff_rbf", meta.at("coeff_kernel"));
      model.local_pod_rbf = std::move(f);
    }
    if (surrogates.contains("pod-nn")) {
      const json& meta = surrogates.at("pod-nn");
      const std::string dir = "surrogates/pod_nn";
      PodNnSurrogate s;
      s.scaler = scaler_from_json(meta.at("scaler"));
      s.basis = model.surrogate_basis.value();
      s.net.layer_sizes = meta.at("layer_sizes").get<std::vector<std::size_t>>();
      s.net.activation = parse_activation(meta.at("activation").get<std::string>());
      s.net.learning_rate = meta.at("learning_rate").get<double>();
      for (std::size_t l = 0; l + 1 < s.net.layer_sizes.size(); ++l) {
        s.net.weights.push_back(r.dense(dir + "/W" + std::to_string(l) + ".romx"));
        s.net.biases.push_back(r.vector(dir + "/b" + std::to_string(l) + ".romx"));
      }
      try {
        validate_mlp(s.net);
      } catch (const Error& e) {
        fail(ErrorCode::corrupt_package, dir + ": " + e.what());
      }
      s.coeff_mean = r.vector(dir + "/coeff_mean.romx");
      s.coeff_scale = r.vector(dir + "/coeff_scale.romx");
      for (const auto& row : parse_csv(r.bytes(dir + "/loss.csv"), 2, dir + "/loss.csv")) {
        s.loss_history.push_back(row[1]);
      }
      model.pod_nn = std::move(s);
    }
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::corrupt_package, std::string("manifest.json: ") + e.what());
  } catch (const std::bad_optional_access&) {
    fail(ErrorCode::corrupt_package, "manifest.json: surrogate listed without its POD basis");
  }
}

}  // namespace romkit

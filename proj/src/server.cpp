#include "romkit/server.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>

#include <httplib.h>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"
#include "romkit/package.hpp"
#include "romkit/validation.hpp"

namespace romkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

HttpReply error_reply(int status, const std::string& message,
                      const std::optional<std::string>& field = std::nullopt) {
  json body{{"error", message}};
  if (field) body["field"] = *field;
  return {status, body};
}

HttpReply not_found(const std::string& id) { return error_reply(404, "unknown model '" + id + "'"); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

std::string range_text(double lo, double hi) {
  return "[" + format_double(lo) + ", " + format_double(hi) + "]";
}

const char* placeholder_page =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>romkit</title></head>"
    "<body><h1>romkit</h1><p>Reduced-order model service. The API lives under "
    "<code>/api/models</code>.</p></body></html>";

}  // namespace

RomService::RomService(std::vector<ModelArtifacts> models) {
  for (auto& m : models) {
    if (models_.count(m.model_id)) {
      fail(ErrorCode::invalid_argument, "duplicate model id '" + m.model_id + "'");
    }
    auto entry = std::make_shared<Entry>();
    entry->mesh_json = mesh_to_json(m.mesh);
    const std::string id = m.model_id;
    entry->model = std::move(m);
    models_[id] = std::move(entry);
  }
}

RomService RomService::load_directory(const fs::path& dir) {
  std::vector<ModelArtifacts> models;
  if (fs::exists(dir / "manifest.json")) {
    models.push_back(load_package(dir));
  } else {
    if (!fs::is_directory(dir)) fail(ErrorCode::io_error, "models directory " + dir.string() + " not found");
    std::vector<fs::path> candidates;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory() && fs::exists(e.path() / "manifest.json")) candidates.push_back(e.path());
    }
    std::sort(candidates.begin(), candidates.end());
    for (const auto& p : candidates) models.push_back(load_package(p));
  }
  return RomService(std::move(models));
}

const RomService::Entry* RomService::find(const std::string& id) const {
  const auto it = models_.find(id);
  return it == models_.end() ? nullptr : it->second.get();
}

HttpReply RomService::list_models() const {
  json list = json::array();
  for (const auto& [id, entry] : models_) {
    list.push_back({{"id", id},
                    {"basis_dim", entry->model.reduced.dim()},
                    {"nodes", entry->model.mesh.node_count()}});
  }
  return {200, {{"models", list}}};
}

HttpReply RomService::metadata(const std::string& id) const {
  const Entry* e = find(id);
  if (!e) return not_found(id);
  const ModelArtifacts& m = e->model;
  json methods = json::array();
  json dims = json::object();
  for (const auto method : m.methods()) {
    methods.push_back(to_string(method));
    dims[to_string(method)] = m.method_dim(method);
  }
  return {200,
          {{"id", id},
           {"N", m.reduced.dim()},
           {"basis_method", to_string(m.settings.method)},
           {"parameter_box",
            {{"mu0", {parameter_box.mu0_min, parameter_box.mu0_max}},
             {"mu1", {parameter_box.mu1_min, parameter_box.mu1_max}}}},
           {"mesh",
            {{"refine", m.mesh.refine},
             {"nodes", m.mesh.node_count()},
             {"cells", m.mesh.cell_count()},
             {"free_nodes", m.system->free_count()}}},
           {"methods", methods},
           {"method_dims", dims}}};
}

HttpReply RomService::mesh(const std::string& id) const {
  const Entry* e = find(id);
  if (!e) return not_found(id);
  return {200, e->mesh_json};
}

HttpReply RomService::solve(const std::string& id, const std::string& request_body) const {
  const Entry* e = find(id);
  if (!e) return not_found(id);
  const ModelArtifacts& m = e->model;

  json req;
  try {
    req = json::parse(request_body);
  } catch (const json::exception&) {
    return error_reply(400, "request body is not valid JSON");
  }
  if (!req.is_object()) return error_reply(400, "request body must be a JSON object");

  OnlineMethod method = OnlineMethod::rb;
  if (req.contains("method")) {
    if (!req["method"].is_string()) return error_reply(400, "method must be a string", "method");
    const auto parsed = parse_online_method(req["method"].get<std::string>());
    if (!parsed) {
      return error_reply(422, "unknown method '" + req["method"].get<std::string>() +
                                  "' (rb|pod-rbf|local-pod-rbf|pod-nn)", "method");
    }
    if (!m.has_method(*parsed)) {
      return error_reply(422, "method '" + to_string(*parsed) + "' not available in this model",
                         "method");
    }
    method = *parsed;
  }

  const json& mu_json = req.contains("mu") ? req["mu"] : json();
  if (!mu_json.is_array() || mu_json.size() != 2 || !mu_json[0].is_number() ||
      !mu_json[1].is_number()) {
    return error_reply(400, "mu must be an array of two numbers", "mu");
  }
  const ParameterPoint mu{mu_json[0].get<double>(), mu_json[1].get<double>()};
  if (!(mu.mu0 >= parameter_box.mu0_min && mu.mu0 <= parameter_box.mu0_max)) {
    return error_reply(400, "mu0 = " + format_double(mu.mu0) + " outside " +
                                range_text(parameter_box.mu0_min, parameter_box.mu0_max), "mu");
  }
  if (!(mu.mu1 >= parameter_box.mu1_min && mu.mu1 <= parameter_box.mu1_max)) {
    return error_reply(400, "mu1 = " + format_double(mu.mu1) + " outside " +
                                range_text(parameter_box.mu1_min, parameter_box.mu1_max), "mu");
  }

  const std::size_t dim = m.method_dim(method);
  std::size_t n = dim;
  if (req.contains("n")) {
    const json& nj = req["n"];
    if (!nj.is_number_integer() || nj.get<long long>() < 1 ||
        nj.get<long long>() > static_cast<long long>(dim)) {
      return error_reply(400, "n must be an integer in [1, " + std::to_string(dim) + "]", "n");
    }
    n = nj.get<std::size_t>();
  }
  bool compare_fom = false;
  if (req.contains("compare_fom")) {
    if (!req["compare_fom"].is_boolean()) {
      return error_reply(400, "compare_fom must be a boolean", "compare_fom");
    }
    compare_fom = req["compare_fom"].get<bool>();
  }

  try {
    const AffineSystem& sys = *m.system;
    const OnlineResult online = online_solve(m, method, mu, n);
    const Field field = sys.expand(online.free_values);
    json body{{"method", to_string(method)},
              {"mu", {mu.mu0, mu.mu1}},
              {"n", n},
              {"field", std::vector<double>(field.values.data(), field.values.data() + field.values.size())},
              {"s", online.output_s},
              {"s_average", online.output_s / sys.base_length()},
              {"eta_en", online.eta_en},
              {"online_ms", online.online_ms},
              {"extrapolated", online.extrapolated},
              {"warnings", online.warnings}};
    if (compare_fom) {
      const FomSolution fom = fom_solve(sys, mu);
      const ErrorReport r = compare_with_fom(sys, mu, online, fom);
      body["fom_ms"] = fom.wall_time * 1e3;
      body["effectivity"] = finite_or_null(r.effectivity);
      body["energy_error"] = r.energy_norm_error;
      body["v_error"] = r.v_norm_error;
      body["relative_error"] = r.relative_error;
      body["s_fom"] = r.s_fom;
      body["output_error"] = r.output_error;
    }
    return {200, body};
  } catch (const Error& err) {
    if (err.code() == ErrorCode::invalid_argument) return error_reply(400, err.what());
    return error_reply(500, std::string(to_string(err.code())) + ": " + err.what());
  }
}

HttpReply RomService::convergence(const std::string& id, const std::string& grid_text) const {
  const Entry* e = find(id);
  if (!e) return not_found(id);
  GridSpec grid;
  try {
    grid = GridSpec::parse(grid_text, GridKind::validation);
  } catch (const Error& err) {
    return error_reply(400, err.what(), "grid");
  }
  const auto key = std::make_pair(id, grid.to_string());
  {
    std::shared_lock lock(cache_mutex_);
    const auto it = convergence_cache_.find(key);
    if (it != convergence_cache_.end()) return {200, it->second};
  }
  json body;
  try {
    const ValidationResult v = run_validation(e->model, grid);
    body = {{"model", id}, {"grid", grid.to_string()}, {"rows", convergence_to_json(v.rows)}};
  } catch (const Error& err) {
    return error_reply(500, std::string(to_string(err.code())) + ": " + err.what());
  }
  std::unique_lock lock(cache_mutex_);
  return {200, convergence_cache_.emplace(key, std::move(body)).first->second};
}

void install_routes(httplib::Server& server, const RomService& service,
                    const ServerOptions& options) {
  const auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server.Get("/api/models", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.list_models());
  });
  server.Get(R"(/api/models/([^/]+))", [&service, send](const httplib::Request& req,
                                                         httplib::Response& res) {
    send(res, service.metadata(req.matches[1]));
  });
  server.Get(R"(/api/models/([^/]+)/mesh)", [&service, send](const httplib::Request& req,
                                                              httplib::Response& res) {
    send(res, service.mesh(req.matches[1]));
  });
  server.Post(R"(/api/models/([^/]+)/solve)", [&service, send](const httplib::Request& req,
                                                                httplib::Response& res) {
    send(res, service.solve(req.matches[1], req.body));
  });
  server.Get(R"(/api/models/([^/]+)/convergence)", [&service, send](const httplib::Request& req,
                                                                     httplib::Response& res) {
    if (!req.has_param("grid")) {
      send(res, error_reply(400, "missing query parameter grid=AxB", "grid"));
      return;
    }
    send(res, service.convergence(req.matches[1], req.get_param_value("grid")));
  });
  server.set_exception_handler([send](const httplib::Request&, httplib::Response& res,
                                      std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, error_reply(500, what));
  });

  if (options.static_dir) {
    if (!server.set_mount_point("/", options.static_dir->string())) {
      fail(ErrorCode::io_error, "static directory " + options.static_dir->string() + " not found");
    }
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(placeholder_page, "text/html");
    });
  }
}

int run_server(const ServerOptions& options) {
  const RomService service = RomService::load_directory(options.models_dir);
  httplib::Server server;
  install_routes(server, service, options);
  std::cerr << "serving " << service.list_models().body["models"].size() << " model(s) on "
            << options.host << ':' << options.port << '\n';
  if (!server.listen(options.host, options.port)) {
    fail(ErrorCode::io_error, "cannot listen on " + options.host + ":" + std::to_string(options.port));
  }
  return 0;
}

}  // namespace romkit

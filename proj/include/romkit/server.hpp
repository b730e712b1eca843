#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "romkit/model.hpp"

namespace httplib {
class Server;
}

namespace romkit {

struct ServerOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::filesystem::path models_dir;
  std::string cors_origin = "*";
  /// Directory served at `/`; a placeholder page is served when unset.
  std::optional<std::filesystem::path> static_dir;
};

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

/// Request handling, independent of the HTTP transport. Models are immutable
/// after construction; the convergence cache is the only shared mutable state.
class RomService {
 public:
  explicit RomService(std::vector<ModelArtifacts> models);

  /// `dir` is either a package itself or a directory of packages.
  static RomService load_directory(const std::filesystem::path& dir);

  HttpReply list_models() const;
  HttpReply metadata(const std::string& id) const;
  HttpReply mesh(const std::string& id) const;
  HttpReply solve(const std::string& id, const std::string& request_body) const;
  HttpReply convergence(const std::string& id, const std::string& grid) const;

 private:
  struct Entry {
    ModelArtifacts model;
    nlohmann::json mesh_json;
  };
  const Entry* find(const std::string& id) const;

  std::map<std::string, std::shared_ptr<const Entry>> models_;
  mutable std::shared_mutex cache_mutex_;
  mutable std::map<std::pair<std::string, std::string>, nlohmann::json> convergence_cache_;
};

/// Installs the API routes, CORS headers and the static mount on `server`.
void install_routes(httplib::Server& server, const RomService& service, const ServerOptions& options);

/// Blocks serving until the process is stopped.
int run_server(const ServerOptions& options);

}  // namespace romkit

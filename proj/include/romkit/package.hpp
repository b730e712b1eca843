#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "romkit/model.hpp"

namespace romkit {

inline constexpr int package_format_version = 1;

/// Writes the model into `root` (created if needed). Binary arrays go to
/// ROMX files; manifest.json is written last through a rename, and any
/// previous manifest is removed first. Returns the manifest.
nlohmann::json save_package(const std::filesystem::path& root, const ModelArtifacts& model);

/// Verifies every inventoried file against its hash before decoding.
ModelArtifacts load_package(const std::filesystem::path& root);

nlohmann::json read_manifest(const std::filesystem::path& root);

}  // namespace romkit

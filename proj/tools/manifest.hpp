#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace probe::cli {

// Reproducibility record written next to every output file.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config;
  std::vector<std::filesystem::path> inputs;
};

// Hex SHA-256 of a file's contents. Throws IoError.
std::string sha256_file(const std::filesystem::path& path);

nlohmann::ordered_json manifest_json(const RunManifest& manifest, const std::string& version);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest, const std::string& version);

}  // namespace probe::cli

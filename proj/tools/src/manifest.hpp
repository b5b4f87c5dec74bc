#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wsrm::cli {

// Git blob id: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_sha1(const std::string& content);
std::string git_blob_sha1_of_file(const std::filesystem::path& path);

/// Provenance record embedded in every output file.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::vector<unsigned long long> seeds;
  std::string instance_hash;  // empty when the command reads no instance
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
  // Single-line "# manifest: {...}" header for CSV files.
  std::string csv_comment() const;
};

}  // namespace wsrm::cli

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ergoinv {

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

struct ManifestCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  // "<=" or ">="
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  std::vector<ManifestCheck> checks;
  std::vector<std::string> advisories;

  nlohmann::json to_json(const std::filesystem::path& run_dir) const;
};

// Version strings of the library and its numerical dependencies.
nlohmann::json version_info();

// Output directory that only becomes visible when committed: files are
// written under a hidden staging directory that is renamed on commit() and
// removed if the object is destroyed uncommitted.
class RunDirectory {
public:
  RunDirectory(const std::filesystem::path& out_root, const std::string& command,
               const std::string& config_hash);
  ~RunDirectory();
  RunDirectory(const RunDirectory&) = delete;
  RunDirectory& operator=(const RunDirectory&) = delete;

  std::filesystem::path file(const std::string& name) const { return staging_ / name; }
  // Writes manifest.json (listing every file with its digest) and publishes.
  std::filesystem::path commit(const RunManifest& manifest);

private:
  std::filesystem::path staging_;
  std::filesystem::path final_;
  bool committed_ = false;
};

}  // namespace ergoinv

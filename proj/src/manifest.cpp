#include "ergoinv/manifest.hpp"

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ergoinv/error.hpp"

namespace ergoinv {

namespace {

class Sha256 {
public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorKind::precondition, "SHA-256 initialization failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md.data(), &len);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
  }

private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

nlohmann::json version_info() {
  nlohmann::json v;
  v["ergoinv"] = "0.1.0";
  v["compiler"] = __VERSION__;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["openssl"] = OPENSSL_VERSION_TEXT;
  v["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
              "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  return v;
}

nlohmann::json RunManifest::to_json(const std::filesystem::path& run_dir) const {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["versions"] = version_info();
  j["wall_time"] = wall_time;
  nlohmann::json outputs = nlohmann::json::array();
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    outputs.push_back({{"path", f.filename().string()},
                       {"sha256", sha256_file(f)},
                       {"bytes", std::filesystem::file_size(f)}});
  }
  j["outputs"] = outputs;
  nlohmann::json checks = nlohmann::json::array();
  bool all = true;
  for (const auto& c : this->checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit},
                      {"relation", c.relation}});
    all = all && c.pass;
  }
  j["checks"] = checks;
  j["pass"] = all;
  j["advisories"] = advisories;
  return j;
}

RunDirectory::RunDirectory(const std::filesystem::path& out_root, const std::string& command,
                           const std::string& config_hash) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream stamp;
  stamp << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  const std::string name = command + "-" + config_hash.substr(0, 8) + "-" + stamp.str();
  std::filesystem::create_directories(out_root);
  final_ = out_root / name;
  for (int i = 1; std::filesystem::exists(final_); ++i) final_ = out_root / (name + "-" + std::to_string(i));
  staging_ = out_root / ("." + final_.filename().string() + ".partial");
  std::filesystem::create_directories(staging_);
}

RunDirectory::~RunDirectory() {
  if (!committed_) {
    std::error_code ec;
    std::filesystem::remove_all(staging_, ec);
  }
}

std::filesystem::path RunDirectory::commit(const RunManifest& manifest) {
  const auto j = manifest.to_json(staging_);
  std::ofstream(staging_ / "manifest.json") << j.dump(2) << "\n";
  std::filesystem::rename(staging_, final_);
  committed_ = true;
  return final_;
}

}  // namespace ergoinv

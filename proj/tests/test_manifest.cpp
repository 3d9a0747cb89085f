#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ergoinv/manifest.hpp"

using namespace ergoinv;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

std::size_t entries(const fs::path& dir) {
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}));
}

}  // namespace

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto dir = fresh_dir("ergoinv_sha");
  fs::create_directories(dir);
  std::ofstream(dir / "f") << "abc";
  EXPECT_EQ(sha256_file(dir / "f"), sha256_hex("abc"));
  fs::remove_all(dir);
}

TEST(RunDirectory, UncommittedRunLeavesNothing) {
  const auto root = fresh_dir("ergoinv_rundir_a");
  {
    RunDirectory run(root, "simulate", sha256_hex("x"));
    std::ofstream(run.file("samples.csv")) << "chain,step,x\n";
    EXPECT_EQ(entries(root), 1u);
  }
  EXPECT_EQ(entries(root), 0u);
  fs::remove_all(root);
}

TEST(RunDirectory, CommitPublishesManifest) {
  const auto root = fresh_dir("ergoinv_rundir_b");
  RunManifest m;
  m.command = "density";
  m.config_hash = sha256_hex("cfg");
  m.seed = 11;
  m.checks.push_back({"weak_form", true, 1e-9, 1e-6, "<="});
  m.advisories.push_back("note");
  fs::path dir;
  {
    RunDirectory run(root, m.command, m.config_hash);
    std::ofstream(run.file("density.csv")) << "x,p\n0,1\n";
    dir = run.commit(m);
  }
  ASSERT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_EQ(entries(root), 1u);
  EXPECT_EQ(dir.filename().string().rfind("density-" + m.config_hash.substr(0, 8), 0), 0u);
  nlohmann::json j;
  std::ifstream(dir / "manifest.json") >> j;
  EXPECT_EQ(j["command"], "density");
  EXPECT_EQ(j["seed"], 11);
  EXPECT_TRUE(j["pass"].get<bool>());
  ASSERT_EQ(j["outputs"].size(), 1u);
  EXPECT_EQ(j["outputs"][0]["path"], "density.csv");
  EXPECT_EQ(j["outputs"][0]["sha256"], sha256_file(dir / "density.csv"));
  EXPECT_TRUE(j["versions"].contains("eigen"));
  EXPECT_EQ(j["advisories"][0], "note");
  fs::remove_all(root);
}

TEST(RunDirectory, FailedCheckMarksManifest) {
  const auto root = fresh_dir("ergoinv_rundir_c");
  RunManifest m;
  m.command = "invert";
  m.config_hash = sha256_hex("y");
  m.checks.push_back({"masked_fraction", false, 0.9, 0.5, "<="});
  RunDirectory run(root, m.command, m.config_hash);
  const auto dir = run.commit(m);
  nlohmann::json j;
  std::ifstream(dir / "manifest.json") >> j;
  EXPECT_FALSE(j["pass"].get<bool>());
  fs::remove_all(root);
}

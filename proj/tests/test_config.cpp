#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ergoinv/config.hpp"
#include "ergoinv/error.hpp"

using namespace ergoinv;

namespace {

std::string config_message(const std::string& text) {
  try {
    Config::parse(text, "t.cfg");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    return e.what();
  }
  ADD_FAILURE() << "expected a config error";
  return {};
}

}  // namespace

TEST(Config, ParsesSectionsCommentsAndTypes) {
  const auto cfg = Config::parse(R"(
# leading comment
[simulate]
dt = 1e-3      # trailing comment
n_steps = 5000
x0 = 1, -2.5
[density]
strict_tail = false
)");
  EXPECT_DOUBLE_EQ(cfg.get_double("simulate", "dt", 0.0), 1e-3);
  EXPECT_EQ(cfg.get_count("simulate", "n_steps", 0), 5000u);
  EXPECT_EQ(cfg.get_list("simulate", "x0", {}), (std::vector<double>{1.0, -2.5}));
  EXPECT_FALSE(cfg.get_bool("density", "strict_tail", true));
  EXPECT_EQ(cfg.get("density", "method", "kde"), "kde");
  EXPECT_FALSE(cfg.has("grid", "nodes"));
}

TEST(Config, DiagnosticsCarrySourceAndLine) {
  EXPECT_NE(config_message("[a]\nx = 1\nx = 2\n").find("t.cfg:3"), std::string::npos);
  EXPECT_NE(config_message("[a]\n[b]\n[a]\n").find("t.cfg:3"), std::string::npos);
  EXPECT_NE(config_message("x = 1\n").find("t.cfg:1"), std::string::npos);
  EXPECT_NE(config_message("[a]\nno equals sign\n").find("t.cfg:2"), std::string::npos);
  EXPECT_NE(config_message("[a\n").find("unterminated"), std::string::npos);
  EXPECT_NE(config_message("[a]\nk =\n").find("empty value"), std::string::npos);
}

TEST(Config, TypedGettersReportTheKeyLine) {
  const auto cfg = Config::parse("[simulate]\n\nn_steps = 12.5\ndt = fast\nflag = maybe\n", "t.cfg");
  try {
    cfg.get_count("simulate", "n_steps", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("t.cfg:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cfg.get_double("simulate", "dt", 0.0), Error);
  EXPECT_THROW(cfg.get_bool("simulate", "flag", false), Error);
}

TEST(Config, SchemaRejectsUnknownSectionsAndKeys) {
  const auto& schema = config_schema();
  EXPECT_NO_THROW(Config::parse("[run]\nseed = 7\n[tolerances]\nc1.ks = 0.5\n").require_known(schema));
  EXPECT_THROW(Config::parse("[bogus]\na = 1\n").require_known(schema), Error);
  EXPECT_THROW(Config::parse("[simulate]\nseed = 1\n").require_known(schema), Error);
}

TEST(Config, CanonicalFormIsOrderIndependent) {
  const auto a = Config::parse("[b]\ny = 2\n[a]\nx = 1\n");
  const auto b = Config::parse("[a]\nx =    1\n\n[b]\ny = 2 # note\n");
  EXPECT_EQ(a.canonical(), b.canonical());
  auto c = a;
  c.set("a", "x", "3");
  EXPECT_NE(a.canonical(), c.canonical());
}

TEST(Config, ModelKinds) {
  const auto preset = model_from_config(Config::parse("[model]\npreset = cauchy_gauge\n"));
  const std::vector<double> x{2.0};
  EXPECT_NEAR(diffusion_1d(preset, 2.0), 6.0, 1e-12);

  const auto general = model_from_config(Config::parse("[model]\nkind = general\ndrift = -x^3\nsigma = 1 + x^2\n"));
  EXPECT_NEAR(general.drift(x)[0], -8.0, 1e-14);
  EXPECT_NEAR(general.sigma_matrix(x)(0, 0), 5.0, 1e-14);

  const auto additive = model_from_config(
      Config::parse("[model]\nkind = additive\ndimension = 2\ndrift = -x1; -2*x2\nsigma = 1, 0; 0, 2\n"));
  const std::vector<double> y{1.0, 1.0};
  EXPECT_NEAR(additive.drift(y)[1], -2.0, 1e-14);
  EXPECT_NEAR(additive.sigma_matrix(y)(1, 1), 2.0, 1e-14);

  const auto langevin = model_from_config(Config::parse("[model]\nkind = langevin\npotential = -x^4/4\nbeta = 3\n"));
  ASSERT_TRUE(langevin.beta().has_value());
  EXPECT_DOUBLE_EQ(*langevin.beta(), 3.0);
  EXPECT_NEAR(langevin.drift(x)[0], -8.0, 1e-6);

  EXPECT_THROW(model_from_config(Config::parse("[model]\nkind = magic\n")), Error);
  EXPECT_THROW(model_from_config(Config::parse("[model]\npreset = nope\n")), Error);
  EXPECT_THROW(model_from_config(Config::parse("[model]\nkind = additive\ndimension = 2\ndrift = -x1\nsigma = 1\n")),
               Error);
}

TEST(Config, SimulationSeedComesFromRunSection) {
  const auto cfg = Config::parse("[run]\nseed = 99\n[simulate]\nn_steps = 300\nthinning = 3\n");
  const auto s = sim_config_from(cfg);
  EXPECT_EQ(s.seed, 99u);
  EXPECT_EQ(s.n_steps, 300u);
  EXPECT_EQ(s.thinning, 3u);
  EXPECT_EQ(sim_config_from(Config::parse("")).seed, kDefaultSeed);
}

TEST(Config, GridFromConfig) {
  const auto g = grid_from_config(Config::parse("[grid]\nlower = -2, -3\nupper = 2\nnodes = 21\n"), 2, -1.0, 1.0, 9);
  EXPECT_EQ(g.dim(), 2u);
  EXPECT_DOUBLE_EQ(g.coordinate(1, 0), -3.0);
  EXPECT_DOUBLE_EQ(g.coordinate(0, 20), 2.0);
  EXPECT_THROW(grid_from_config(Config::parse("[grid]\nnodes = 20\n"), 1, -1.0, 1.0, 9), Error);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "ergoinv_config_test.cfg";
  std::ofstream(path) << "[run]\nseed = 5\n";
  const auto cfg = Config::load(path);
  EXPECT_EQ(cfg.get_u64("run", "seed", 0), 5u);
  EXPECT_EQ(cfg.source(), path.string());
  std::filesystem::remove(path);
  EXPECT_THROW(Config::load(path), Error);
}

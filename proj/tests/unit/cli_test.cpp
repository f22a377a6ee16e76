#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stripsurvey/config.hpp"
#include "stripsurvey/frame_io.hpp"

namespace fs = std::filesystem;
using namespace stripsurvey;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stripsurvey_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome cli(const std::string& args) {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + STRIPSURVEY_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(out);
    o.err = slurp(err);
    return o;
  }

  fs::path write(const std::string& name, const std::string& body) {
    const auto p = dir_ / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
  }

  fs::path small_spec() {
    auto j = detail::load_json(std::string(STRIPSURVEY_CONFIGS) + "/default_population.json");
    j["pool_size"] = 20000;
    j["grid"]["strips"] = 24;
    j["grid"]["rows"] = 80;
    return write("spec.json", j.dump(2));
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenPopIsDeterministic) {
  const auto spec = small_spec();
  const auto a = dir_ / "a.csv";
  const auto b = dir_ / "b.csv";
  ASSERT_EQ(cli("gen-pop " + spec.string() + " --out " + a.string() + " --seed 5").code, 0);
  ASSERT_EQ(cli("gen-pop " + spec.string() + " --out " + b.string() + " --seed 5").code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NO_THROW(load_frame(a.string()));
  const std::string manifest = slurp(a.string() + ".manifest");
  EXPECT_NE(manifest.find("seed = 5"), std::string::npos);
  EXPECT_NE(manifest.find("frame_digest = fnv1a64:"), std::string::npos);
}

TEST_F(Cli, NonPositiveDefiniteSpecExitsTwo) {
  auto j = detail::load_json(std::string(STRIPSURVEY_CONFIGS) + "/default_population.json");
  j["correlation"] = {{1.0, 0.9, 0.9, 0.0}, {0.9, 1.0, -0.9, 0.0}, {0.9, -0.9, 1.0, 0.0}, {0.0, 0.0, 0.0, 1.0}};
  const auto spec = write("bad.json", j.dump());
  const auto o = cli("gen-pop " + spec.string() + " --out " + (dir_ / "x.csv").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("correlation"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("positive definite"), std::string::npos) << o.err;
}

TEST_F(Cli, TruthOfTwoCellFrame) {
  const auto frame = write("two.csv",
                           "# stripsurvey-frame 1\n# strips 2\n# strata 1\n# cell_area_ha 1\n"
                           "cell_id,strip_id,stratum_id,lidar_height,biomass_density,domain_proportion,x_km,y_km\n"
                           "0,0,0,10,10,1,0,0\n1,1,0,0,0,0,0.1,0\n");
  const auto o = cli("truth " + frame.string());
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, "t = 0.01 kt\nA = 0.01 km^2\nD = 10 Mg/ha\n");
}

TEST_F(Cli, BrokenFrameExitsTwo) {
  const auto frame = write("bad.csv", "# stripsurvey-frame 1\n# strips 2\n");
  EXPECT_EQ(cli("truth " + frame.string()).code, 2);
  EXPECT_EQ(cli("truth " + (dir_ / "missing.csv").string()).code, 2);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("simulate").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("--version").code, 0);
}

TEST_F(Cli, SimulateWritesNineRowsAndIsJobInvariant) {
  const auto spec = small_spec();
  const auto frame = dir_ / "frame.csv";
  ASSERT_EQ(cli("gen-pop " + spec.string() + " --out " + frame.string() + " --seed 3").code, 0);
  const auto config = write("sim.json", R"({
    "replicates": 40, "master_seed": 11,
    "estimators": ["total.SRS_PS", "total.R", "total.R_PS"],
    "modes": ["SRS"], "intensities": [0.08, 0.04, 0.02], "strips_sampled": 8
  })");
  const auto one = dir_ / "one";
  const auto many = dir_ / "many";
  auto o = cli("simulate " + config.string() + " " + frame.string() + " --out " + one.string() + " --jobs 1 --dump-replicates");
  ASSERT_EQ(o.code, 0) << o.err;
  o = cli("simulate " + config.string() + " " + frame.string() + " --out " + many.string() + " --jobs 8");
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string csv = slurp(one / "summary.csv");
  EXPECT_EQ(csv, slurp(many / "summary.csv"));
  std::istringstream lines(csv);
  std::string line;
  int rows = -1;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 9);
  EXPECT_TRUE(fs::exists(one / "summary.md"));
  EXPECT_TRUE(fs::exists(one / "replicates.csv"));
  EXPECT_FALSE(fs::exists(many / "replicates.csv"));
  const std::string manifest = slurp(one / "manifest.txt");
  EXPECT_NE(manifest.find("master_seed = 11"), std::string::npos);
  EXPECT_NE(manifest.find("config_digest = fnv1a64:"), std::string::npos);

  const auto md = dir_ / "report.md";
  ASSERT_EQ(cli("report " + (one / "summary.csv").string() + " --out " + md.string()).code, 0);
  EXPECT_EQ(slurp(md), slurp(one / "summary.md"));
}

TEST_F(Cli, SimulateRefusesWrongTruth) {
  const auto spec = small_spec();
  const auto frame = dir_ / "frame.csv";
  ASSERT_EQ(cli("gen-pop " + spec.string() + " --out " + frame.string()).code, 0);
  const auto config = write("sim.json", R"({
    "replicates": 5, "modes": ["SRS"], "intensities": [0.08], "strips_sampled": 8,
    "truth": {"total": 1.0, "area": 1.0, "density": 1.0}
  })");
  const auto o = cli("simulate " + config.string() + " " + frame.string() + " --out " + (dir_ / "o").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("truth"), std::string::npos) << o.err;
}

TEST_F(Cli, SimulateRejectsUnknownConfigKeys) {
  const auto spec = small_spec();
  const auto frame = dir_ / "frame.csv";
  ASSERT_EQ(cli("gen-pop " + spec.string() + " --out " + frame.string()).code, 0);
  const auto config = write("sim.json", R"({"replicates": 5, "modes": ["SRS"], "intensities": [0.08], "jobs": 3})");
  const auto o = cli("simulate " + config.string() + " " + frame.string() + " --out " + (dir_ / "o").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("unknown key \"jobs\""), std::string::npos) << o.err;
}

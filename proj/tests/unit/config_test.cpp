#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "stripsurvey/config.hpp"

using namespace stripsurvey;
using nlohmann::json;

namespace {

std::string config_path(const char* name) { return std::string(STRIPSURVEY_CONFIGS) + "/" + name; }

json default_spec_json() { return detail::load_json(config_path("default_population.json")); }

}  // namespace

TEST(Config, ShippedConfigsParse) {
  const auto spec = load_copula_spec(config_path("default_population.json"));
  EXPECT_NO_THROW(validate_spec(spec));
  EXPECT_EQ(spec.stratum_count(), 4);
  EXPECT_DOUBLE_EQ(spec.correlation[1][2], 0.84);
  EXPECT_EQ(spec.grid.strips, 120);

  const auto srs = load_sim_config(config_path("srs_study.json"));
  EXPECT_EQ(srs.replicates, 2000);
  ASSERT_EQ(srs.designs.size(), 3u);
  EXPECT_EQ(srs.designs[2].plot_intensity, 0.00375);
  EXPECT_EQ(srs.designs[0].strips_sampled, 40);

  const auto full = load_sim_config(config_path("full_study.json"));
  EXPECT_EQ(full.designs.size(), 6u);
  EXPECT_EQ(full.designs[3].mode, DesignMode::kSystematic);

  const auto quick = load_sim_config(config_path("totals_quick.json"));
  EXPECT_EQ(quick.estimators.size(), 3u);
  EXPECT_EQ(quick.designs.size(), 3u);
}

TEST(Config, SpecRoundTripsThroughJson) {
  const auto spec = load_copula_spec(config_path("default_population.json"));
  const auto again = parse_copula_spec(copula_spec_json(spec));
  EXPECT_EQ(copula_spec_json(again).dump(), copula_spec_json(spec).dump());
  EXPECT_TRUE(generate_population(spec, 1) == generate_population(again, 1));
}

TEST(Config, UnknownKeysAreRejected) {
  auto j = default_spec_json();
  j["corelation"] = j["correlation"];
  EXPECT_THROW(parse_copula_spec(j), ConfigError);
  j = default_spec_json();
  j["grid"]["strip"] = 3;
  try {
    parse_copula_spec(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("grid"), std::string::npos) << e.what();
  }
  j = default_spec_json();
  j["marginals"]["lidar_height"]["mean"] = 1.0;
  EXPECT_THROW(parse_copula_spec(j), ConfigError);
  EXPECT_THROW(parse_sim_config(json{{"replicates", 10}, {"designz", json::array()}}), ConfigError);
}

TEST(Config, InfinityIsSpelledAsAString) {
  auto j = default_spec_json();
  j["domain_link"]["intercept"] = "inf";
  EXPECT_TRUE(std::isinf(parse_copula_spec(j).domain_link.intercept));
  j["domain_link"]["intercept"] = "lots";
  EXPECT_THROW(parse_copula_spec(j), ConfigError);
}

TEST(Config, ModesTimesIntensities) {
  const json j = {{"replicates", 10},
                  {"master_seed", 3},
                  {"modes", {"SRS", "SYSTEMATIC"}},
                  {"intensities", {0.1, 0.05}},
                  {"strips_sampled", 6}};
  const auto c = parse_sim_config(j);
  ASSERT_EQ(c.designs.size(), 4u);
  EXPECT_EQ(c.designs[1].mode, DesignMode::kSrs);
  EXPECT_EQ(c.designs[1].plot_intensity, 0.05);
  EXPECT_EQ(c.designs[2].mode, DesignMode::kSystematic);
  EXPECT_EQ(c.designs[3].strips_sampled, 6);
  EXPECT_EQ(c.estimators.size(), 9u);
  EXPECT_DOUBLE_EQ(c.z, 1.96);
}

TEST(Config, InvalidSimulationValues) {
  const json base = {{"replicates", 10}, {"designs", {{{"mode", "SRS"}, {"plot_intensity", 0.1}}}}};
  EXPECT_NO_THROW(parse_sim_config(base));
  auto j = base;
  j["replicates"] = 1;
  EXPECT_THROW(parse_sim_config(j), ConfigError);
  j = base;
  j["designs"][0]["mode"] = "CLUSTER";
  EXPECT_THROW(parse_sim_config(j), ConfigError);
  j = base;
  j["designs"][0]["plot_intensity"] = 1.5;
  EXPECT_THROW(parse_sim_config(j), ConfigError);
  j = base;
  j["estimators"] = {"total.R", "total.Q"};
  EXPECT_THROW(parse_sim_config(j), ConfigError);
  j = base;
  j["z"] = 0.0;
  EXPECT_THROW(parse_sim_config(j), ConfigError);
  j = base;
  j["designs"] = json::array();
  j["modes"] = {"SRS"};
  EXPECT_THROW(parse_sim_config(j), ConfigError);
}

TEST(Config, TruthBlock) {
  json j = {{"replicates", 10},
            {"designs", {{{"mode", "SRS"}, {"plot_intensity", 0.1}}}},
            {"truth", {{"total", 10.0}, {"area", 1.0}, {"density", 10.0}}}};
  const auto c = parse_sim_config(j);
  ASSERT_TRUE(c.truth.has_value());
  EXPECT_EQ(c.truth->total, 10.0);
}

TEST(Config, MissingFileAndBadJson) {
  EXPECT_THROW(load_sim_config("/nonexistent/config.json"), ConfigError);
  EXPECT_THROW(parse_copula_spec(json::parse(R"({"correlation": [[1]]})")), ConfigError);
}

#include "radarnet/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace radarnet {
namespace {

using nlohmann::json;

json minimal() {
  return json{{"schema_version", 1},
              {"radars", json::array({{{"position", {10, 20}}}})},
              {"targets", {{"count", 3}}}};
}

std::string field_of(const json& j) {
  try {
    scenario_from_json(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

TEST(Scenario, MinimalDefaults) {
  const Scenario s = scenario_from_json(minimal());
  EXPECT_EQ(s.num_radars(), 1);
  EXPECT_EQ(s.num_targets(), 3);
  EXPECT_EQ(s.episode_length, 300);
  EXPECT_DOUBLE_EQ(s.radars[0].budget, 4.0);
  EXPECT_DOUBLE_EQ(s.radars[0].fov_halfwidth_deg, 180.0);
  EXPECT_DOUBLE_EQ(s.kalman.meas_noise_sigma, 0.5);
  EXPECT_DOUBLE_EQ(s.effective_distance_scale(), 40.0);
  EXPECT_DOUBLE_EQ(s.effective_speed_scale(), 1.5);
}

TEST(Scenario, ErrorsNameTheField) {
  json j = minimal();
  j.erase("schema_version");
  EXPECT_EQ(field_of(j), "schema_version");

  j = minimal();
  j["schema_version"] = 99;
  EXPECT_EQ(field_of(j), "schema_version");

  j = minimal();
  j["radars"][0]["fov_range"] = -1;
  EXPECT_EQ(field_of(j), "radars[0].fov_range");

  j = minimal();
  j["radars"][0]["budget"] = "lots";
  EXPECT_EQ(field_of(j), "radars[0].budget");

  j = minimal();
  j["targets"] = {{"count", 0}};
  EXPECT_EQ(field_of(j), "targets");

  j = minimal();
  j["radars"] = json::array();
  EXPECT_EQ(field_of(j), "radars");

  j = minimal();
  j["episode_length"] = 0;
  EXPECT_EQ(field_of(j), "episode_length");

  j = minimal();
  j["cost_model"] = {{"mode", "quadratic"}};
  EXPECT_EQ(field_of(j), "cost_model.mode");

  j = minimal();
  j["kalman"] = {{"meas_noise_sigma", 0.0}};
  EXPECT_EQ(field_of(j), "kalman");
}

TEST(Scenario, JsonRoundTripPreservesHash) {
  json j = minimal();
  j["targets"] = {{"fixed", {{{"position", {5, 5}}, {"speed", 1.2}, {"heading_deg", 30}}}}};
  j["cost_model"] = {{"mode", "range4"}, {"d_ref", 25}};
  const Scenario a = scenario_from_json(j);
  const Scenario b = scenario_from_json(scenario_to_json(a));
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(scenario_to_json(a), scenario_to_json(b));
  EXPECT_EQ(b.cost_mode, CostMode::kRange4);
  ASSERT_EQ(b.fixed_targets.size(), 1u);
  EXPECT_DOUBLE_EQ(b.fixed_targets[0].speed, 1.2);

  Scenario c = a;
  c.radars[0].budget = 3;
  EXPECT_NE(a.hash(), c.hash());
}

TEST(Scenario, ShippedFilesLoad) {
  int loaded = 0;
  for (const auto& entry : std::filesystem::directory_iterator(RADARNET_SCENARIO_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_scenario_file(entry.path().string())) << entry.path();
    ++loaded;
  }
  EXPECT_GE(loaded, 8);
  const Scenario training = load_scenario_file(std::string(RADARNET_SCENARIO_DIR) + "/training.json");
  EXPECT_EQ(training.num_radars(), 3);
  EXPECT_EQ(training.num_targets(), 20);
  const Scenario stacked = load_scenario_file(std::string(RADARNET_SCENARIO_DIR) + "/stacked_8.json");
  EXPECT_EQ(stacked.num_radars(), 8);
}

TEST(Scenario, MissingFileIsConfigError) {
  EXPECT_THROW(load_scenario_file("/nonexistent/scenario.json"), ConfigError);
}

}  // namespace
}  // namespace radarnet

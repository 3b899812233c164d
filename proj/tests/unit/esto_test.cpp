#include "radarnet/esto.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "radarnet/policy.hpp"
#include "radarnet/world.hpp"

namespace radarnet::esto {
namespace {

std::shared_ptr<const Scenario> load(const std::string& name) {
  return std::make_shared<const Scenario>(
      load_scenario_file(std::string(RADARNET_SCENARIO_DIR) + "/" + name + ".json"));
}

Observation random_obs(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> n(0.0, 1.0);
  Observation obs;
  obs.rows.resize(m, feature::kCount);
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < feature::kCount; ++c) obs.rows(i, c) = n(rng);
  }
  obs.fov_mask.assign(m, true);
  return obs;
}

TEST(Features, DimensionsAndCommunicationWiring) {
  const auto e = feature_indices(Variant::kEsto);
  const auto em = feature_indices(Variant::kEstoM);
  EXPECT_EQ(e.size(), 9u);
  EXPECT_EQ(em.size(), 11u);
  for (int comm : {feature::kEstimatedUtility, feature::kEstimatedUtilityDelta}) {
    EXPECT_EQ(std::count(e.begin(), e.end(), comm), 0);
    EXPECT_EQ(std::count(em.begin(), em.end(), comm), 1);
  }
  std::vector<int> extra;
  for (int k : em) {
    if (std::find(e.begin(), e.end(), k) == e.end()) extra.push_back(k);
  }
  EXPECT_EQ(extra, (std::vector<int>{feature::kEstimatedUtility, feature::kEstimatedUtilityDelta}));
  EXPECT_EQ(parse_variant(variant_name(Variant::kEstoM)), Variant::kEstoM);
  EXPECT_THROW(parse_variant("esto-x"), ConfigError);
}

TEST(Scores, LinearInWeights) {
  std::mt19937_64 rng(1);
  const Observation obs = random_obs(rng, 7);
  EXPECT_EQ(preference_scores(PreferenceModel::zeros(Variant::kEsto), obs),
            Eigen::VectorXd::Zero(7));
  const auto idx = feature_indices(Variant::kEsto);
  for (int k = 0; k < 9; ++k) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(9);
    w(k) = 1.0;
    const Eigen::VectorXd s = preference_scores(PreferenceModel::make(Variant::kEsto, w), obs);
    for (int j = 0; j < 7; ++j) {
      EXPECT_EQ(s(j), idx[k] == kConstantFeature ? 1.0 : obs.rows(j, idx[k]));
    }
  }
}

TEST(Select, Examples) {
  const std::vector<double> unit(3, 1.0);
  const std::vector<double> s = {3.0, 1.0, 2.0};
  EXPECT_EQ(select_by_score(s, {true, true, true}, unit, 2.0).targets, (std::vector<int>{0, 2}));
  EXPECT_TRUE(select_by_score(s, {false, false, false}, unit, 2.0).targets.empty());
  const std::vector<double> tie = {1.0, 1.0, 1.0};
  EXPECT_EQ(select_by_score(tie, {true, true, true}, unit, 2.0).targets, (std::vector<int>{0, 1}));
  const std::vector<double> costs = {2.5, 1.0, 1.0};
  EXPECT_EQ(select_by_score(s, {true, true, true}, costs, 2.0).targets, (std::vector<int>{2, 1}));
}

TEST(Select, AffineInvarianceAndFeasibility) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + trial % 15;
    std::vector<double> s(m), costs(m);
    std::vector<bool> mask(m);
    for (int j = 0; j < m; ++j) {
      s[j] = std::round(u(rng) * 4.0) / 4.0;  // forces ties
      costs[j] = 0.1 + u(rng);
      mask[j] = u(rng) > 0.8;
    }
    Radar r;
    r.budget = u(rng);
    const Allocation a = select_by_score(s, mask, costs, r.budget);
    EXPECT_TRUE(validate_allocation(a, r, costs));
    std::vector<double> t(m);
    for (int j = 0; j < m; ++j) t[j] = 2.0 * s[j] + 4.0;
    EXPECT_EQ(select_by_score(t, mask, costs, r.budget).targets, a.targets);
  }
}

TEST(Policy, NegativeRangeWeightReproducesBaseline) {
  const auto sc = load("training");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(9);
  w(0) = -1.0;  // feature 0 of the ESTO set is the estimated range
  ASSERT_EQ(feature_indices(Variant::kEsto)[0], feature::kRange);
  EstoPolicy esto(PreferenceModel::make(Variant::kEsto, w));
  GreedyPolicy greedy;
  EXPECT_EQ(run_episode(sc, 4, esto, 40), run_episode(sc, 4, greedy, 40));
}

TEST(Fitness, DeterministicAndInRange) {
  const auto sc = load("training");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd w(9);
  for (int k = 0; k < 9; ++k) w(k) = n(rng);
  const PreferenceModel model = PreferenceModel::make(Variant::kEsto, w);
  const std::vector<std::uint64_t> seeds = {1, 2};
  const double a = fitness(model, sc, seeds, 20);
  EXPECT_EQ(a, fitness(model, sc, seeds, 20));
  EXPECT_GT(a, 0.0);
  EXPECT_LE(a, 1.0);
}

TEST(Fitness, ZeroBudgetIgnoresWeights) {
  Scenario s = *load("training");
  for (auto& r : s.radars) r.budget = 0.0;
  const auto sc = std::make_shared<const Scenario>(s);
  const std::vector<std::uint64_t> seeds = {5};
  IdlePolicy idle;
  const auto u = run_episode(sc, 5, idle, 15);
  double idle_mean = 0.0;
  for (double x : u) idle_mean += x;
  idle_mean /= static_cast<double>(u.size());
  Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(11, -2.0, 3.0);
  EXPECT_DOUBLE_EQ(fitness(PreferenceModel::make(Variant::kEstoM, w), sc, seeds, 15), idle_mean);
  EXPECT_DOUBLE_EQ(fitness(PreferenceModel::zeros(Variant::kEstoM), sc, seeds, 15), idle_mean);
}

TEST(Weights, JsonRoundTripAndValidation) {
  const PreferenceModel m =
      PreferenceModel::make(Variant::kEstoM, Eigen::VectorXd::LinSpaced(11, -1.0, 1.0));
  const PreferenceModel back = weights_from_json(weights_to_json(m, "abc", 7));
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.variant, Variant::kEstoM);
  auto j = weights_to_json(m, "abc", 7);
  j["weights"].erase(0);
  EXPECT_THROW(weights_from_json(j), ConfigError);
  EXPECT_THROW(PreferenceModel::make(Variant::kEsto, Eigen::VectorXd::Zero(11)),
               std::invalid_argument);
}

TEST(Train, ResumeMatchesStraightRunAndBestEverIsMonotone) {
  TrainingConfig cfg;
  cfg.scenario = load("training");
  cfg.generations = 4;
  cfg.runs = 2;
  cfg.steps = 10;
  const TrainingResult straight = train(cfg);
  ASSERT_EQ(straight.history.size(), 4u);
  for (std::size_t g = 1; g < straight.history.size(); ++g) {
    EXPECT_GE(straight.history[g].best_ever, straight.history[g - 1].best_ever);
  }
  EXPECT_EQ(straight.best_fitness, straight.history.back().best_ever);

  const std::string path =
      (std::filesystem::temp_directory_path() / "radarnet_esto_resume_test.json").string();
  std::filesystem::remove(path);
  TrainingConfig half = cfg;
  half.generations = 2;
  train(half, path);
  const TrainingResult resumed = train(cfg, path);
  EXPECT_EQ(resumed.model.weights, straight.model.weights);
  EXPECT_EQ(resumed.best_fitness, straight.best_fitness);

  TrainingConfig other = cfg;
  other.runs = 3;
  EXPECT_THROW(train(other, path), ConfigError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace radarnet::esto

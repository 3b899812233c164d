#include "radarnet/policy.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>

namespace radarnet {
namespace {

Observation make_obs(const std::vector<double>& ranges, std::vector<bool> mask = {}) {
  Observation obs;
  obs.rows.setZero(static_cast<int>(ranges.size()), feature::kCount);
  for (std::size_t j = 0; j < ranges.size(); ++j) obs.rows(j, feature::kRange) = ranges[j];
  obs.fov_mask = mask.empty() ? std::vector<bool>(ranges.size(), true) : std::move(mask);
  return obs;
}

Radar radar_with_budget(double budget) {
  Radar r;
  r.budget = budget;
  r.fov_halfwidth = std::numbers::pi;
  return r;
}

TEST(FovContains, RangeDiscAndSector) {
  Radar r;
  r.position = Vec2(1, 1);
  r.fov_range = 10;
  r.fov_halfwidth = std::numbers::pi;
  EXPECT_TRUE(fov_contains(r, r.position));
  EXPECT_TRUE(fov_contains(r, Vec2(11, 1)));
  EXPECT_FALSE(fov_contains(r, Vec2(11 + 1e-9, 1)));
  EXPECT_TRUE(fov_contains(r, Vec2(-8, 1)));

  r.fov_halfwidth = std::numbers::pi / 4;
  r.facing = std::numbers::pi / 2;
  EXPECT_TRUE(fov_contains(r, Vec2(1, 5)));
  EXPECT_FALSE(fov_contains(r, Vec2(5, 1)));
  EXPECT_FALSE(fov_contains(r, Vec2(1, -5)));
  EXPECT_TRUE(fov_contains(r, r.position));
}

TEST(ValidateAllocation, Cases) {
  const Radar r = radar_with_budget(2);
  const std::vector<double> costs = {1, 1, 1};
  EXPECT_TRUE(validate_allocation(Allocation{0, {}, 0}, r, costs));
  EXPECT_FALSE(validate_allocation(Allocation{0, {1, 1}, 2}, r, costs));
  EXPECT_TRUE(validate_allocation(Allocation{0, {0, 2}, 2}, r, costs));
  EXPECT_FALSE(validate_allocation(Allocation{0, {0, 1, 2}, 3}, r, costs));
  EXPECT_FALSE(validate_allocation(Allocation{0, {3}, 1}, r, costs));
  EXPECT_FALSE(validate_allocation(Allocation{0, {-1}, 1}, r, costs));
}

TEST(GreedyBaseline, ClosestFirst) {
  const std::vector<double> costs = {1, 1, 1};
  const Allocation a = greedy_baseline(make_obs({0.3, 0.1, 0.2}), radar_with_budget(2), costs);
  EXPECT_EQ(a.targets, (std::vector<int>{1, 2}));
  EXPECT_DOUBLE_EQ(a.total_cost, 2.0);
}

TEST(GreedyBaseline, MaskedClosestExcluded) {
  const std::vector<double> costs = {1, 1, 1};
  const Allocation a =
      greedy_baseline(make_obs({0.1, 0.2, 0.3}, {false, true, true}), radar_with_budget(1), costs);
  EXPECT_EQ(a.targets, (std::vector<int>{1}));
}

TEST(GreedyBaseline, ZeroBudget) {
  const std::vector<double> costs = {1, 1};
  EXPECT_TRUE(greedy_baseline(make_obs({0.1, 0.2}), radar_with_budget(0), costs).targets.empty());
}

TEST(GreedyBaseline, SkipsUnaffordableAndContinues) {
  const std::vector<double> costs = {1.5, 2.0, 0.5};
  const Allocation a = greedy_baseline(make_obs({0.1, 0.2, 0.3}), radar_with_budget(2), costs);
  EXPECT_EQ(a.targets, (std::vector<int>{0, 2}));
}

TEST(GreedyBaseline, TiesByIdAscending) {
  const std::vector<double> costs = {1, 1, 1, 1};
  const Allocation a =
      greedy_baseline(make_obs({0.5, 0.2, 0.5, 0.5}), radar_with_budget(3), costs);
  EXPECT_EQ(a.targets, (std::vector<int>{1, 0, 2}));
}

TEST(GreedyBaseline, BudgetSafeAndPermutationEquivariant) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int m = 1 + trial % 12;
    std::vector<double> ranges(m), costs(m);
    std::vector<bool> mask(m);
    for (int j = 0; j < m; ++j) {
      ranges[j] = u(rng);
      costs[j] = 0.1 + 2.0 * u(rng);
      mask[j] = u(rng) < 0.8;
    }
    const Radar r = radar_with_budget(4.0 * u(rng));
    const Allocation a = greedy_baseline(make_obs(ranges, mask), r, costs);
    ASSERT_TRUE(validate_allocation(a, r, costs));

    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pr(m), pc(m);
    std::vector<bool> pm(m);
    for (int j = 0; j < m; ++j) {
      pr[j] = ranges[perm[j]];
      pc[j] = costs[perm[j]];
      pm[j] = mask[perm[j]];
    }
    const Allocation b = greedy_baseline(make_obs(pr, pm), r, pc);
    std::vector<int> mapped;
    for (int j : b.targets) mapped.push_back(perm[j]);
    std::vector<int> expected = a.targets;
    std::sort(mapped.begin(), mapped.end());
    std::sort(expected.begin(), expected.end());
    ASSERT_EQ(mapped, expected) << "trial " << trial;
  }
}

TEST(RandomPolicy, FeasibleAndSeeded) {
  const std::vector<double> costs(10, 1.0);
  RandomPolicy p1(3), p2(3);
  const Observation obs = make_obs(std::vector<double>(10, 0.5));
  const Radar r = radar_with_budget(4);
  for (int k = 0; k < 20; ++k) {
    const Allocation a = p1.decide(obs, r, costs);
    EXPECT_EQ(a.targets, p2.decide(obs, r, costs).targets);
    EXPECT_EQ(a.targets.size(), 4u);
    EXPECT_TRUE(validate_allocation(a, r, costs));
  }
}

}  // namespace
}  // namespace radarnet

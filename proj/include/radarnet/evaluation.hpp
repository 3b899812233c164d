#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "radarnet/allocation.hpp"
#include "radarnet/scenario.hpp"

namespace radarnet {

// Builds a fresh policy for one evaluation seed; every radar shares it.
using PolicyFactory = std::function<std::unique_ptr<AllocationPolicy>(std::uint64_t seed)>;

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<double> utility;  // per step
  double mean = 0.0;
};

// One episode per seed. Seeds may run in parallel; the result is ordered as
// `seeds` and independent of `threads`. A failing seed is rethrown as
// std::runtime_error naming the seed.
std::vector<SeedRun> evaluate(std::shared_ptr<const Scenario> scenario,
                              const PolicyFactory& factory, std::span<const std::uint64_t> seeds,
                              int steps, int threads);

struct Stats {
  int n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double se = 0.0;   // std / sqrt(n)
};

Stats describe(std::span<const double> values);
// Statistics of a[i] - b[i]; the runs must share seeds in the same order.
Stats paired_difference(std::span<const SeedRun> a, std::span<const SeedRun> b);
std::vector<double> episode_means(std::span<const SeedRun> runs);

// Least-squares slope of values against 0, 1, 2, ...
double trend_slope(std::span<const double> values);

}  // namespace radarnet

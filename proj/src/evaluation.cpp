#include "radarnet/evaluation.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "radarnet/parallel.hpp"
#include "radarnet/world.hpp"

namespace radarnet {

std::vector<SeedRun> evaluate(std::shared_ptr<const Scenario> scenario,
                              const PolicyFactory& factory, std::span<const std::uint64_t> seeds,
                              int steps, int threads) {
  if (!scenario) throw std::invalid_argument("evaluate needs a scenario");
  std::vector<SeedRun> runs(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), threads, [&](int i) {
    SeedRun& run = runs[i];
    run.seed = seeds[i];
    try {
      std::unique_ptr<AllocationPolicy> policy = factory(run.seed);
      run.utility = run_episode(scenario, run.seed, *policy, steps);
    } catch (const std::exception& e) {
      throw std::runtime_error("seed " + std::to_string(run.seed) + ": " + e.what());
    }
    run.mean = std::accumulate(run.utility.begin(), run.utility.end(), 0.0) /
               static_cast<double>(run.utility.size());
  });
  return runs;
}

Stats describe(std::span<const double> values) {
  Stats s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (s.n - 1));
    s.se = s.std / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

Stats paired_difference(std::span<const SeedRun> a, std::span<const SeedRun> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired runs differ in length");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].seed != b[i].seed) throw std::invalid_argument("paired runs use different seeds");
    d[i] = a[i].mean - b[i].mean;
  }
  return describe(d);
}

std::vector<double> episode_means(std::span<const SeedRun> runs) {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const SeedRun& r : runs) out.push_back(r.mean);
  return out;
}

double trend_slope(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  if (values.size() < 2) return 0.0;
  const double x_mean = (n - 1.0) / 2.0;
  const double y_mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (values[i] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace radarnet

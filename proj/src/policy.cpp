#include "radarnet/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace radarnet {

bool fov_contains(const Radar& radar, const Vec2& point) {
  const Vec2 d = point - radar.position;
  const double dist = d.norm();
  if (dist > radar.fov_range) return false;
  if (radar.fov_halfwidth >= std::numbers::pi || dist == 0.0) return true;
  const double offset = std::remainder(std::atan2(d.y(), d.x()) - radar.facing,
                                       2.0 * std::numbers::pi);
  return std::abs(offset) <= radar.fov_halfwidth;
}

bool Allocation::contains(int target) const {
  return std::find(targets.begin(), targets.end(), target) != targets.end();
}

bool validate_allocation(const Allocation& alloc, const Radar& radar,
                         std::span<const double> costs) {
  std::vector<int> sorted = alloc.targets;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  double total = 0.0;
  for (int j : sorted) {
    if (j < 0 || j >= static_cast<int>(costs.size())) return false;
    total += costs[j];
  }
  // Summation order differs between callers; allow roundoff at the boundary.
  return total <= radar.budget + 1e-9 * std::max(1.0, radar.budget);
}

Allocation greedy_fill(int radar_id, std::span<const int> order,
                       const std::vector<bool>& fov_mask, std::span<const double> costs,
                       double budget) {
  Allocation alloc;
  alloc.radar_id = radar_id;
  double remaining = budget;
  for (int j : order) {
    if (!fov_mask[j]) continue;
    if (costs[j] > remaining) continue;
    alloc.targets.push_back(j);
    alloc.total_cost += costs[j];
    remaining = budget - alloc.total_cost;
  }
  return alloc;
}

Allocation greedy_baseline(const Observation& obs, const Radar& radar,
                           std::span<const double> costs) {
  std::vector<int> order(obs.num_targets());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return obs.rows(a, feature::kRange) < obs.rows(b, feature::kRange);
  });
  return greedy_fill(radar.id, order, obs.fov_mask, costs, radar.budget);
}

Allocation IdlePolicy::decide(const Observation&, const Radar& radar, std::span<const double>) {
  Allocation alloc;
  alloc.radar_id = radar.id;
  return alloc;
}

Allocation RandomPolicy::decide(const Observation& obs, const Radar& radar,
                                std::span<const double> costs) {
  std::vector<int> order(obs.num_targets());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);
  return greedy_fill(radar.id, order, obs.fov_mask, costs, radar.budget);
}

}  // namespace radarnet

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "radarnet/allocation.hpp"

namespace radarnet {

// Greedy fill over `order` (target ids, most preferred first): add each
// in-FOV target whose cost still fits, skipping unaffordable ones.
Allocation greedy_fill(int radar_id, std::span<const int> order,
                       const std::vector<bool>& fov_mask, std::span<const double> costs,
                       double budget);

// In-FOV targets by estimated range ascending, ties by id.
Allocation greedy_baseline(const Observation& obs, const Radar& radar,
                           std::span<const double> costs);

class GreedyPolicy final : public AllocationPolicy {
 public:
  Allocation decide(const Observation& obs, const Radar& radar,
                    std::span<const double> costs) override {
    return greedy_baseline(obs, radar, costs);
  }
  std::string name() const override { return "baseline"; }
};

// Tracks nothing.
class IdlePolicy final : public AllocationPolicy {
 public:
  Allocation decide(const Observation& obs, const Radar& radar,
                    std::span<const double> costs) override;
  std::string name() const override { return "idle"; }
};

// Uniformly shuffled in-FOV targets, greedily filled.
class RandomPolicy final : public AllocationPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  Allocation decide(const Observation& obs, const Radar& radar,
                    std::span<const double> costs) override;
  std::string name() const override { return "random"; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace radarnet

#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "radarnet/geometry.hpp"

namespace radarnet {

struct Radar {
  int id = 0;
  Vec2 position = Vec2::Zero();
  double budget = 4.0;         // energy units per step
  double fov_range = 40.0;     // distance
  double fov_halfwidth = 0.0;  // radians in (0, pi]; pi is a full disc
  double facing = 0.0;         // radians
};

bool fov_contains(const Radar& radar, const Vec2& point);

// Per-(radar, target) observation features. Indices are zero-based.
namespace feature {
inline constexpr int kRelX = 0;
inline constexpr int kRelY = 1;
inline constexpr int kRange = 2;
inline constexpr int kBearingSin = 3;
inline constexpr int kBearingCos = 4;
inline constexpr int kVelX = 5;
inline constexpr int kVelY = 6;
inline constexpr int kSpeed = 7;
inline constexpr int kClosingSpeed = 8;
inline constexpr int kCovTrace = 9;
inline constexpr int kOwnArea = 10;
inline constexpr int kLogSharedArea = 11;
inline constexpr int kStaleness = 12;
inline constexpr int kInFov = 13;
inline constexpr int kBudgetLeft = 14;
inline constexpr int kCostShare = 15;
inline constexpr int kOtherRadarDistance = 16;
inline constexpr int kOtherRadarRelX = 17;
inline constexpr int kOtherRadarRelY = 18;
inline constexpr int kOtherFovCoverage = 19;
inline constexpr int kBudgetCommitted = 20;
inline constexpr int kEstimatedUtility = 21;
inline constexpr int kEstimatedUtilityDelta = 22;
inline constexpr int kCount = 23;
}  // namespace feature

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, feature::kCount, Eigen::RowMajor>;

// One radar's view of all m targets.
struct Observation {
  int radar_id = 0;
  FeatureMatrix rows;
  std::vector<bool> fov_mask;

  int num_targets() const { return static_cast<int>(rows.rows()); }
};

struct Allocation {
  int radar_id = 0;
  std::vector<int> targets;  // in selection order
  double total_cost = 0.0;

  bool contains(int target) const;
};

// Budget constraint check: distinct in-range target ids whose summed cost
// does not exceed the radar budget.
bool validate_allocation(const Allocation& alloc, const Radar& radar,
                         std::span<const double> costs);

class AllocationPolicy {
 public:
  virtual ~AllocationPolicy() = default;

  virtual Allocation decide(const Observation& obs, const Radar& radar,
                            std::span<const double> costs) = 0;
  virtual std::string name() const = 0;
};

}  // namespace radarnet

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "radarnet/allocation.hpp"
#include "radarnet/geometry.hpp"
#include "radarnet/scenario.hpp"
#include "radarnet/tracking.hpp"

namespace radarnet {

struct Target {
  int id = 0;
  Vec2 position = Vec2::Zero();
  double speed = 1.0;    // distance per step, constant over the lifetime
  double heading = 0.0;  // radians
  int generation = 0;    // bumped each time the slot is respawned
};

// Snapshot of the shared allocation board as one agent saw it when deciding.
struct BoardView {
  std::vector<Allocation> announced;
  std::vector<int> announced_at_step;  // -1 if never announced
};

// The multi-radar simulation. Single-threaded; copies are independent and
// may be stepped concurrently.
class World {
 public:
  World(std::shared_ptr<const Scenario> scenario, std::uint64_t seed);

  int num_radars() const { return static_cast<int>(radars_.size()); }
  int num_targets() const { return static_cast<int>(targets_.size()); }
  int step_index() const { return step_index_; }
  std::uint64_t seed() const { return seed_; }
  const Scenario& scenario() const { return *scenario_; }
  std::shared_ptr<const Scenario> scenario_ptr() const { return scenario_; }

  const std::vector<Radar>& radars() const { return radars_; }
  const Radar& radar(int i) const { return radars_.at(i); }
  const std::vector<Target>& targets() const { return targets_; }
  const Target& target(int j) const { return targets_.at(j); }
  const tracking::Track& track(int radar, int target) const;

  // Latest allocation announced by `radar` (possibly from the previous step).
  const Allocation& announced(int radar) const { return board_.at(radar); }
  int announced_at_step(int radar) const { return board_step_.at(radar); }
  BoardView board() const { return {board_, board_step_}; }

  // Per-target intersection areas at the end of the previous step (shared
  // summary available to every radar).
  const std::vector<double>& shared_areas() const { return shared_area_; }
  const geometry::UtilityRecord& last_record() const { return last_record_; }
  const std::vector<std::string>& events() const { return events_; }
  const std::vector<int>& last_order() const { return last_order_; }

  // Tracking cost l_i^j of each target for `radar`, from its own estimates.
  std::vector<double> costs(int radar) const;

  Observation observe(int radar) const;

  // One simulation step: random-order decisions against the shared board,
  // Kalman predict/update, target motion, utility.
  geometry::UtilityRecord step(std::span<AllocationPolicy* const> policies);
  geometry::UtilityRecord step(AllocationPolicy& shared_policy);

  // Per-target intersection of all radars' current position ellipses.
  std::vector<double> current_areas() const;

 private:
  void refresh_forecast();
  double estimated_utility(int observer, int target) const;
  void respawn(int target);
  // Search sweeps are not modelled beyond this: a radar's track of a target
  // restarts at the first noisy sighting inside its FOV.
  void detect();
  Vec2 noisy(const Vec2& p, std::mt19937_64& rng) const;

  std::shared_ptr<const Scenario> scenario_;
  std::uint64_t seed_;
  std::vector<Radar> radars_;
  std::vector<Target> targets_;
  std::vector<tracking::Track> tracks_;  // row-major n x m

  int step_index_ = 0;
  std::mt19937_64 motion_rng_;
  std::mt19937_64 measurement_rng_;
  std::mt19937_64 scheduler_rng_;
  std::mt19937_64 spawn_rng_;

  std::vector<Allocation> board_;
  std::vector<int> board_step_;
  std::vector<char> board_mask_;  // n x m membership of board_
  std::vector<char> detected_;    // n x m, cleared when a target respawns

  std::vector<double> shared_area_;
  std::vector<double> prev_estimated_utility_;  // n x m, NaN when unset
  std::vector<double> forecast_predicted_area_;  // n x m
  std::vector<double> forecast_updated_area_;    // n x m

  geometry::UtilityRecord last_record_;
  std::vector<int> last_order_;
  std::vector<std::string> events_;
};

// Per-step utilities of one episode from a fresh World. `steps` <= 0 uses
// the scenario's episode length.
std::vector<double> run_episode(std::shared_ptr<const Scenario> scenario, std::uint64_t seed,
                                std::span<AllocationPolicy* const> policies, int steps = 0);
std::vector<double> run_episode(std::shared_ptr<const Scenario> scenario, std::uint64_t seed,
                                AllocationPolicy& shared_policy, int steps = 0);

}  // namespace radarnet

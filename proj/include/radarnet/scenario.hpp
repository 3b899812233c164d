#pragma once

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "radarnet/geometry.hpp"
#include "radarnet/tracking.hpp"

namespace radarnet {

// Thrown for malformed configuration; `field` is the dotted path of the
// offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline constexpr int kScenarioSchemaVersion = 1;

struct Bounds {
  double xmin = 0.0, ymin = 0.0, xmax = 100.0, ymax = 100.0;

  bool contains(const Vec2& p) const {
    return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
  }
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
};

struct RadarSpec {
  Vec2 position = Vec2::Zero();
  double budget = 4.0;
  double fov_range = 40.0;
  double fov_halfwidth_deg = 180.0;
  double facing_deg = 0.0;
  int count = 1;  // > 1 stacks identical radars at the same position
};

struct TargetSpec {
  Vec2 position = Vec2::Zero();
  double speed = 1.0;
  double heading_deg = 0.0;
};

enum class CostMode { kUnit, kRange4 };

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name = "unnamed";
  std::string description;
  Bounds bounds;
  int episode_length = 300;
  std::vector<RadarSpec> radars;

  // Either a fixed initial target list or a random count drawn in
  // spawn_region (defaults to bounds).
  std::vector<TargetSpec> fixed_targets;
  int random_target_count = 0;
  std::optional<Bounds> spawn_region;

  double speed_min = 0.5;
  double speed_max = 1.5;
  double max_turn_deg = 15.0;
  double spawn_heading_spread_deg = 60.0;

  CostMode cost_mode = CostMode::kUnit;
  double cost_d_ref = 30.0;

  tracking::KalmanConfig kalman;
  double scale_k = 2.0;
  double area_scale = 1.0;
  double area_cap = 50.0;
  int vertices_per_ellipse = geometry::kDefaultVertices;

  // Feature standardization; 0 selects the default (largest FOV range,
  // largest target speed).
  double distance_scale = 0.0;
  double speed_scale = 0.0;

  int num_radars() const;
  int num_targets() const;
  double effective_distance_scale() const;
  double effective_speed_scale() const;

  void validate() const;
  // Stable FNV-1a hash of the canonical JSON form.
  std::string hash() const;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario_file(const std::string& path);
void save_scenario_file(const Scenario& s, const std::string& path);

}  // namespace radarnet

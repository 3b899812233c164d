#include "radarnet/scenario.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace radarnet {
namespace {

using nlohmann::json;

template <typename T>
T read(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + key, e.what());
  }
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + key, "missing required field");
  return read<T>(j, key, path, T{});
}

Vec2 read_vec2(const json& j, const std::string& key, const std::string& path) {
  const auto v = require<std::vector<double>>(j, key, path);
  if (v.size() != 2) throw ConfigError(path + key, "expected [x, y]");
  return {v[0], v[1]};
}

Bounds read_bounds(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  Bounds b;
  b.xmin = require<double>(j, "xmin", path + ".");
  b.ymin = require<double>(j, "ymin", path + ".");
  b.xmax = require<double>(j, "xmax", path + ".");
  b.ymax = require<double>(j, "ymax", path + ".");
  if (!(b.xmax > b.xmin) || !(b.ymax > b.ymin)) throw ConfigError(path, "empty rectangle");
  return b;
}

json bounds_json(const Bounds& b) {
  return {{"xmin", b.xmin}, {"ymin", b.ymin}, {"xmax", b.xmax}, {"ymax", b.ymax}};
}

}  // namespace

int Scenario::num_radars() const {
  int n = 0;
  for (const auto& r : radars) n += r.count;
  return n;
}

int Scenario::num_targets() const {
  return fixed_targets.empty() ? random_target_count : static_cast<int>(fixed_targets.size());
}

double Scenario::effective_distance_scale() const {
  if (distance_scale > 0.0) return distance_scale;
  double best = 1.0;
  for (const auto& r : radars) best = std::max(best, r.fov_range);
  return best;
}

double Scenario::effective_speed_scale() const {
  if (speed_scale > 0.0) return speed_scale;
  double best = speed_max;
  for (const auto& t : fixed_targets) best = std::max(best, t.speed);
  return std::max(best, 1e-6);
}

void Scenario::validate() const {
  if (schema_version != kScenarioSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(schema_version));
  }
  if (radars.empty()) throw ConfigError("radars", "at least one radar is required");
  for (std::size_t i = 0; i < radars.size(); ++i) {
    const std::string p = "radars[" + std::to_string(i) + "].";
    const RadarSpec& r = radars[i];
    if (!(r.budget >= 0.0)) throw ConfigError(p + "budget", "must be >= 0");
    if (!(r.fov_range > 0.0)) throw ConfigError(p + "fov_range", "must be > 0");
    if (!(r.fov_halfwidth_deg > 0.0 && r.fov_halfwidth_deg <= 180.0)) {
      throw ConfigError(p + "fov_halfwidth_deg", "must be in (0, 180]");
    }
    if (r.count < 1) throw ConfigError(p + "count", "must be >= 1");
  }
  if (num_targets() < 1) throw ConfigError("targets", "at least one target is required");
  for (std::size_t i = 0; i < fixed_targets.size(); ++i) {
    const std::string p = "targets.fixed[" + std::to_string(i) + "].";
    if (!(fixed_targets[i].speed > 0.0)) throw ConfigError(p + "speed", "must be > 0");
    if (!bounds.contains(fixed_targets[i].position)) {
      throw ConfigError(p + "position", "outside bounds");
    }
  }
  if (episode_length < 1) throw ConfigError("episode_length", "must be >= 1");
  if (!(speed_min > 0.0) || !(speed_max >= speed_min)) {
    throw ConfigError("target_speed", "need 0 < min <= max");
  }
  if (!(max_turn_deg >= 0.0)) throw ConfigError("max_turn_deg", "must be >= 0");
  if (!(cost_d_ref > 0.0)) throw ConfigError("cost_model.d_ref", "must be > 0");
  if (!(scale_k > 0.0)) throw ConfigError("scale_k", "must be > 0");
  if (!(area_scale > 0.0)) throw ConfigError("area_scale", "must be > 0");
  if (!(area_cap > 0.0)) throw ConfigError("area_cap", "must be > 0");
  if (vertices_per_ellipse < 8) throw ConfigError("vertices_per_ellipse", "must be >= 8");
  try {
    kalman.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("kalman", e.what());
  }
  if (spawn_region) {
    const Bounds& s = *spawn_region;
    if (s.xmin < bounds.xmin || s.xmax > bounds.xmax || s.ymin < bounds.ymin ||
        s.ymax > bounds.ymax) {
      throw ConfigError("targets.spawn_region", "must lie inside bounds");
    }
  }
}

std::string Scenario::hash() const {
  const std::string canonical = scenario_to_json(*this).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "scenario must be an object");
  Scenario s;
  s.schema_version = require<int>(j, "schema_version", "");
  s.name = read<std::string>(j, "name", "", s.name);
  s.description = read<std::string>(j, "description", "", "");
  if (j.contains("bounds")) s.bounds = read_bounds(j.at("bounds"), "bounds");
  s.episode_length = read<int>(j, "episode_length", "", s.episode_length);

  if (!j.contains("radars") || !j.at("radars").is_array()) {
    throw ConfigError("radars", "missing radar list");
  }
  const json& radars = j.at("radars");
  for (std::size_t i = 0; i < radars.size(); ++i) {
    const std::string p = "radars[" + std::to_string(i) + "].";
    const json& r = radars[i];
    RadarSpec spec;
    spec.position = read_vec2(r, "position", p);
    spec.budget = read<double>(r, "budget", p, spec.budget);
    spec.fov_range = read<double>(r, "fov_range", p, spec.fov_range);
    spec.fov_halfwidth_deg = read<double>(r, "fov_halfwidth_deg", p, spec.fov_halfwidth_deg);
    spec.facing_deg = read<double>(r, "facing_deg", p, spec.facing_deg);
    spec.count = read<int>(r, "count", p, spec.count);
    s.radars.push_back(spec);
  }

  if (!j.contains("targets")) throw ConfigError("targets", "missing target specification");
  const json& t = j.at("targets");
  if (t.contains("fixed")) {
    const json& fixed = t.at("fixed");
    if (!fixed.is_array()) throw ConfigError("targets.fixed", "expected a list");
    for (std::size_t i = 0; i < fixed.size(); ++i) {
      const std::string p = "targets.fixed[" + std::to_string(i) + "].";
      TargetSpec spec;
      spec.position = read_vec2(fixed[i], "position", p);
      spec.speed = read<double>(fixed[i], "speed", p, spec.speed);
      spec.heading_deg = read<double>(fixed[i], "heading_deg", p, spec.heading_deg);
      s.fixed_targets.push_back(spec);
    }
  } else {
    s.random_target_count = require<int>(t, "count", "targets.");
  }
  if (t.contains("spawn_region")) {
    s.spawn_region = read_bounds(t.at("spawn_region"), "targets.spawn_region");
  }
  if (j.contains("target_speed")) {
    const auto v = read<std::vector<double>>(j, "target_speed", "", {});
    if (v.size() != 2) throw ConfigError("target_speed", "expected [min, max]");
    s.speed_min = v[0];
    s.speed_max = v[1];
  }
  s.max_turn_deg = read<double>(j, "max_turn_deg", "", s.max_turn_deg);
  s.spawn_heading_spread_deg =
      read<double>(j, "spawn_heading_spread_deg", "", s.spawn_heading_spread_deg);

  if (j.contains("cost_model")) {
    const json& c = j.at("cost_model");
    const auto mode = read<std::string>(c, "mode", "cost_model.", "unit");
    if (mode == "unit") {
      s.cost_mode = CostMode::kUnit;
    } else if (mode == "range4") {
      s.cost_mode = CostMode::kRange4;
    } else {
      throw ConfigError("cost_model.mode", "expected unit or range4, got " + mode);
    }
    s.cost_d_ref = read<double>(c, "d_ref", "cost_model.", s.cost_d_ref);
  }
  if (j.contains("kalman")) {
    const json& k = j.at("kalman");
    s.kalman.process_noise_q = read<double>(k, "process_noise_q", "kalman.", s.kalman.process_noise_q);
    s.kalman.meas_noise_sigma =
        read<double>(k, "meas_noise_sigma", "kalman.", s.kalman.meas_noise_sigma);
    s.kalman.dt = read<double>(k, "dt", "kalman.", s.kalman.dt);
  }
  s.scale_k = read<double>(j, "scale_k", "", s.scale_k);
  s.area_scale = read<double>(j, "area_scale", "", s.area_scale);
  s.area_cap = read<double>(j, "area_cap", "", s.area_cap);
  s.vertices_per_ellipse = read<int>(j, "vertices_per_ellipse", "", s.vertices_per_ellipse);
  s.distance_scale = read<double>(j, "distance_scale", "", s.distance_scale);
  s.speed_scale = read<double>(j, "speed_scale", "", s.speed_scale);

  s.validate();
  return s;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;
  j["description"] = s.description;
  j["bounds"] = bounds_json(s.bounds);
  j["episode_length"] = s.episode_length;
  j["radars"] = json::array();
  for (const auto& r : s.radars) {
    j["radars"].push_back({{"position", {r.position.x(), r.position.y()}},
                           {"budget", r.budget},
                           {"fov_range", r.fov_range},
                           {"fov_halfwidth_deg", r.fov_halfwidth_deg},
                           {"facing_deg", r.facing_deg},
                           {"count", r.count}});
  }
  json targets;
  if (!s.fixed_targets.empty()) {
    targets["fixed"] = json::array();
    for (const auto& t : s.fixed_targets) {
      targets["fixed"].push_back({{"position", {t.position.x(), t.position.y()}},
                                  {"speed", t.speed},
                                  {"heading_deg", t.heading_deg}});
    }
  } else {
    targets["count"] = s.random_target_count;
  }
  if (s.spawn_region) targets["spawn_region"] = bounds_json(*s.spawn_region);
  j["targets"] = targets;
  j["target_speed"] = {s.speed_min, s.speed_max};
  j["max_turn_deg"] = s.max_turn_deg;
  j["spawn_heading_spread_deg"] = s.spawn_heading_spread_deg;
  j["cost_model"] = {{"mode", s.cost_mode == CostMode::kUnit ? "unit" : "range4"},
                     {"d_ref", s.cost_d_ref}};
  j["kalman"] = {{"process_noise_q", s.kalman.process_noise_q},
                 {"meas_noise_sigma", s.kalman.meas_noise_sigma},
                 {"dt", s.kalman.dt}};
  j["scale_k"] = s.scale_k;
  j["area_scale"] = s.area_scale;
  j["area_cap"] = s.area_cap;
  j["vertices_per_ellipse"] = s.vertices_per_ellipse;
  j["distance_scale"] = s.distance_scale;
  j["speed_scale"] = s.speed_scale;
  return j;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario", std::string("parse error in ") + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

void save_scenario_file(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("scenario", "cannot write " + path);
  out << scenario_to_json(s).dump(2) << "\n";
}

}  // namespace radarnet

#include "radarnet/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace radarnet {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

enum Stream : std::uint32_t { kMotion = 1, kMeasurement = 2, kScheduler = 3, kSpawn = 4 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

double ellipse_area_from_cov(const tracking::Mat4& cov, double scale_k) {
  const double det = std::max(cov.topLeftCorner<2, 2>().determinant(), 0.0);
  return std::numbers::pi * scale_k * scale_k * std::sqrt(det);
}

}  // namespace

World::World(std::shared_ptr<const Scenario> scenario, std::uint64_t seed)
    : scenario_(std::move(scenario)),
      seed_(seed),
      motion_rng_(make_stream(seed, kMotion)),
      measurement_rng_(make_stream(seed, kMeasurement)),
      scheduler_rng_(make_stream(seed, kScheduler)),
      spawn_rng_(make_stream(seed, kSpawn)) {
  if (!scenario_) throw std::invalid_argument("World needs a scenario");
  const Scenario& sc = *scenario_;
  sc.validate();

  for (const RadarSpec& spec : sc.radars) {
    for (int c = 0; c < spec.count; ++c) {
      Radar r;
      r.id = static_cast<int>(radars_.size());
      r.position = spec.position;
      r.budget = spec.budget;
      r.fov_range = spec.fov_range;
      r.fov_halfwidth = spec.fov_halfwidth_deg * kDegToRad;
      r.facing = spec.facing_deg * kDegToRad;
      radars_.push_back(r);
    }
  }

  if (!sc.fixed_targets.empty()) {
    for (const TargetSpec& spec : sc.fixed_targets) {
      Target t;
      t.id = static_cast<int>(targets_.size());
      t.position = spec.position;
      t.speed = spec.speed;
      t.heading = spec.heading_deg * kDegToRad;
      targets_.push_back(t);
    }
  } else {
    const Bounds region = sc.spawn_region.value_or(sc.bounds);
    std::uniform_real_distribution<double> ux(region.xmin, region.xmax);
    std::uniform_real_distribution<double> uy(region.ymin, region.ymax);
    std::uniform_real_distribution<double> uh(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> us(sc.speed_min, sc.speed_max);
    for (int j = 0; j < sc.random_target_count; ++j) {
      Target t;
      t.id = j;
      t.position = Vec2(ux(spawn_rng_), uy(spawn_rng_));
      t.heading = uh(spawn_rng_);
      t.speed = us(spawn_rng_);
      targets_.push_back(t);
    }
  }

  const int n = num_radars();
  const int m = num_targets();
  tracks_.reserve(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      tracks_.push_back(tracking::initial_track(noisy(targets_[j].position, measurement_rng_)));
    }
  }

  // The opening picture counts as a detection for every radar.
  detected_.assign(static_cast<std::size_t>(n) * m, 1);

  board_.resize(n);
  for (int i = 0; i < n; ++i) board_[i].radar_id = i;
  board_step_.assign(n, -1);
  board_mask_.assign(static_cast<std::size_t>(n) * m, 0);
  prev_estimated_utility_.assign(static_cast<std::size_t>(n) * m,
                                 std::numeric_limits<double>::quiet_NaN());

  shared_area_ = current_areas();
  last_record_ = geometry::make_utility_record(shared_area_, sc.area_scale);
  refresh_forecast();
}

const tracking::Track& World::track(int radar, int target) const {
  if (radar < 0 || radar >= num_radars() || target < 0 || target >= num_targets()) {
    throw std::out_of_range("track index out of range");
  }
  return tracks_[static_cast<std::size_t>(radar) * num_targets() + target];
}

Vec2 World::noisy(const Vec2& p, std::mt19937_64& rng) const {
  std::normal_distribution<double> n(0.0, scenario_->kalman.meas_noise_sigma);
  const double dx = n(rng);
  const double dy = n(rng);
  return p + Vec2(dx, dy);
}

std::vector<double> World::costs(int radar) const {
  const Scenario& sc = *scenario_;
  const Radar& r = radars_.at(radar);
  std::vector<double> out(num_targets(), 1.0);
  if (sc.cost_mode == CostMode::kRange4) {
    for (int j = 0; j < num_targets(); ++j) {
      const double d = (track(radar, j).position() - r.position).norm();
      const double raw = std::pow(d / sc.cost_d_ref, 4.0);
      out[j] = std::max(0.1, std::min(raw, r.budget));
    }
  }
  return out;
}

void World::refresh_forecast() {
  const std::size_t total = tracks_.size();
  forecast_predicted_area_.resize(total);
  forecast_updated_area_.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    const tracking::Mat4 pred = tracking::predicted_cov(tracks_[k].cov, scenario_->kalman);
    forecast_predicted_area_[k] = ellipse_area_from_cov(pred, scenario_->scale_k);
    forecast_updated_area_[k] = ellipse_area_from_cov(
        tracking::updated_cov(pred, scenario_->kalman), scenario_->scale_k);
  }
}

double World::estimated_utility(int observer, int target) const {
  const int m = num_targets();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_radars(); ++i) {
    if (i == observer) continue;
    const std::size_t k = static_cast<std::size_t>(i) * m + target;
    const bool will_measure =
        board_mask_[k] && fov_contains(radars_[i], tracks_[k].position());
    best = std::min(best, will_measure ? forecast_updated_area_[k] : forecast_predicted_area_[k]);
  }
  return std::exp(-best / scenario_->area_scale);
}

Observation World::observe(int radar) const {
  const Scenario& sc = *scenario_;
  const Radar& me = radars_.at(radar);
  const int n = num_radars();
  const int m = num_targets();
  const double dist_scale = sc.effective_distance_scale();
  const double speed_scale = sc.effective_speed_scale();
  const double log_cap = std::log1p(sc.area_cap);
  const double diagonal = std::hypot(sc.bounds.width(), sc.bounds.height());
  const std::vector<double> cost = costs(radar);

  Observation obs;
  obs.radar_id = radar;
  obs.rows.setZero(m, feature::kCount);
  obs.fov_mask.assign(m, false);

  for (int j = 0; j < m; ++j) {
    const tracking::Track& t = track(radar, j);
    auto row = obs.rows.row(j);
    const Vec2 rel = t.position() - me.position;
    const double range = rel.norm();
    const Vec2 vel = t.velocity();

    row(feature::kRelX) = rel.x() / dist_scale;
    row(feature::kRelY) = rel.y() / dist_scale;
    row(feature::kRange) = range / dist_scale;
    row(feature::kBearingSin) = range > 1e-12 ? rel.y() / range : 0.0;
    row(feature::kBearingCos) = range > 1e-12 ? rel.x() / range : 1.0;
    row(feature::kVelX) = vel.x() / speed_scale;
    row(feature::kVelY) = vel.y() / speed_scale;
    row(feature::kSpeed) = vel.norm() / speed_scale;
    row(feature::kClosingSpeed) = range > 1e-12 ? -rel.dot(vel) / range / speed_scale : 0.0;
    row(feature::kCovTrace) = std::min(t.position_cov().trace(), sc.area_cap) / sc.area_cap;
    const double own_area = ellipse_area_from_cov(t.cov, sc.scale_k);
    row(feature::kOwnArea) = std::min(own_area, sc.area_cap) / sc.area_cap;
    row(feature::kLogSharedArea) = std::log1p(shared_area_[j]) / log_cap;
    row(feature::kStaleness) = std::min(t.steps_since_update, 20) / 20.0;
    const bool in_fov = fov_contains(me, t.position());
    row(feature::kInFov) = in_fov ? 1.0 : 0.0;
    obs.fov_mask[j] = in_fov;
    row(feature::kBudgetLeft) = me.budget > 0.0 ? 1.0 : 0.0;
    row(feature::kCostShare) = me.budget > 0.0 ? std::min(cost[j] / me.budget, 1.0) : 1.0;

    if (n > 1) {
      double closest = std::numeric_limits<double>::infinity();
      Vec2 closest_rel = Vec2::Zero();
      int covering = 0;
      for (int i = 0; i < n; ++i) {
        if (i == radar) continue;
        const Vec2 d = radars_[i].position - t.position();
        if (d.norm() < closest) {
          closest = d.norm();
          closest_rel = d;
        }
        if (fov_contains(radars_[i], t.position())) ++covering;
      }
      row(feature::kOtherRadarDistance) = closest / dist_scale;
      row(feature::kOtherRadarRelX) = closest_rel.x() / dist_scale;
      row(feature::kOtherRadarRelY) = closest_rel.y() / dist_scale;
      row(feature::kOtherFovCoverage) = static_cast<double>(covering) / (n - 1);
    } else {
      row(feature::kOtherRadarDistance) = diagonal / dist_scale;
    }
    row(feature::kBudgetCommitted) = 0.0;

    const double est = estimated_utility(radar, j);
    row(feature::kEstimatedUtility) = est;
    const double prev = prev_estimated_utility_[static_cast<std::size_t>(radar) * m + j];
    row(feature::kEstimatedUtilityDelta) = std::isnan(prev) ? 0.0 : est - prev;
  }
  return obs;
}

std::vector<double> World::current_areas() const {
  const int n = num_radars();
  const int m = num_targets();
  std::vector<double> areas(m);
  std::vector<geometry::Ellipse> ellipses(n);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      ellipses[i] = tracking::position_ellipse(track(i, j), scenario_->scale_k);
    }
    areas[j] = geometry::intersection_area(ellipses, scenario_->vertices_per_ellipse);
  }
  return areas;
}

void World::respawn(int j) {
  const Bounds& b = scenario_->bounds;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double perimeter = 2.0 * (b.width() + b.height());
  double s = u01(spawn_rng_) * perimeter;
  Vec2 pos;
  double inward = 0.0;
  if (s < b.width()) {
    pos = Vec2(b.xmin + s, b.ymin);
    inward = std::numbers::pi / 2.0;
  } else if ((s -= b.width()) < b.height()) {
    pos = Vec2(b.xmax, b.ymin + s);
    inward = std::numbers::pi;
  } else if ((s -= b.height()) < b.width()) {
    pos = Vec2(b.xmax - s, b.ymax);
    inward = -std::numbers::pi / 2.0;
  } else {
    s -= b.width();
    pos = Vec2(b.xmin, b.ymax - s);
    inward = 0.0;
  }
  const double spread = scenario_->spawn_heading_spread_deg * kDegToRad;
  Target& t = targets_[j];
  t.position = pos;
  t.heading = inward + (2.0 * u01(spawn_rng_) - 1.0) * spread;
  t.speed = scenario_->speed_min + u01(spawn_rng_) * (scenario_->speed_max - scenario_->speed_min);
  ++t.generation;

  const int m = num_targets();
  for (int i = 0; i < num_radars(); ++i) {
    const std::size_t k = static_cast<std::size_t>(i) * m + j;
    tracks_[k] = tracking::initial_track(noisy(pos, spawn_rng_));
    prev_estimated_utility_[k] = std::numeric_limits<double>::quiet_NaN();
    detected_[k] = 0;
  }
}

void World::detect() {
  const int m = num_targets();
  for (int i = 0; i < num_radars(); ++i) {
    for (int j = 0; j < m; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * m + j;
      if (detected_[k] || !fov_contains(radars_[i], targets_[j].position)) continue;
      tracks_[k] = tracking::initial_track(noisy(targets_[j].position, spawn_rng_));
      prev_estimated_utility_[k] = std::numeric_limits<double>::quiet_NaN();
      detected_[k] = 1;
    }
  }
}

geometry::UtilityRecord World::step(AllocationPolicy& shared_policy) {
  std::vector<AllocationPolicy*> all(num_radars(), &shared_policy);
  return step(all);
}

geometry::UtilityRecord World::step(std::span<AllocationPolicy* const> policies) {
  const Scenario& sc = *scenario_;
  const int n = num_radars();
  const int m = num_targets();
  if (static_cast<int>(policies.size()) != n) {
    throw std::invalid_argument("World::step needs one policy per radar");
  }

  // (1)-(2) decisions in a random order against the shared board.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), scheduler_rng_);
  for (int r : order) {
    const Observation obs = observe(r);
    const std::vector<double> cost = costs(r);
    Allocation alloc = policies[r]->decide(obs, radars_[r], cost);
    alloc.radar_id = r;
    if (!validate_allocation(alloc, radars_[r], cost)) {
      std::ostringstream msg;
      msg << "step " << step_index_ << ": radar " << r << " (" << policies[r]->name()
          << ") returned an invalid allocation; using empty allocation";
      events_.push_back(msg.str());
      alloc.targets.clear();
    }
    alloc.total_cost = 0.0;
    for (int j : alloc.targets) alloc.total_cost += cost[j];

    std::fill_n(board_mask_.begin() + static_cast<std::ptrdiff_t>(r) * m, m, 0);
    for (int j : alloc.targets) board_mask_[static_cast<std::size_t>(r) * m + j] = 1;
    board_[r] = std::move(alloc);
    board_step_[r] = step_index_;
    for (int j = 0; j < m; ++j) {
      prev_estimated_utility_[static_cast<std::size_t>(r) * m + j] =
          obs.rows(j, feature::kEstimatedUtility);
    }
  }
  last_order_ = order;

  // (3) Kalman predict everywhere, update where a radar tracks an in-FOV target.
  for (auto& t : tracks_) t = tracking::predict(t, sc.kalman);
  for (int i = 0; i < n; ++i) {
    for (int j : board_[i].targets) {
      if (!fov_contains(radars_[i], targets_[j].position)) continue;
      auto& t = tracks_[static_cast<std::size_t>(i) * m + j];
      t = tracking::update(t, noisy(targets_[j].position, measurement_rng_), sc.kalman);
    }
  }

  // (4) target motion with bounded heading jitter; leavers are replaced.
  const double max_turn = sc.max_turn_deg * kDegToRad;
  std::uniform_real_distribution<double> turn(-max_turn, max_turn);
  for (int j = 0; j < m; ++j) {
    Target& t = targets_[j];
    t.heading = std::remainder(t.heading + turn(motion_rng_), 2.0 * std::numbers::pi);
    t.position += t.speed * Vec2(std::cos(t.heading), std::sin(t.heading));
    if (!sc.bounds.contains(t.position)) respawn(j);
  }
  detect();

  // (5) utility over the intersection of all radars' ellipses.
  shared_area_ = current_areas();
  last_record_ = geometry::make_utility_record(shared_area_, sc.area_scale);
  ++step_index_;
  refresh_forecast();
  return last_record_;
}

std::vector<double> run_episode(std::shared_ptr<const Scenario> scenario, std::uint64_t seed,
                                std::span<AllocationPolicy* const> policies, int steps) {
  World world(std::move(scenario), seed);
  const int horizon = steps > 0 ? steps : world.scenario().episode_length;
  std::vector<double> out;
  out.reserve(horizon);
  for (int k = 0; k < horizon; ++k) out.push_back(world.step(policies).utility);
  return out;
}

std::vector<double> run_episode(std::shared_ptr<const Scenario> scenario, std::uint64_t seed,
                                AllocationPolicy& shared_policy, int steps) {
  std::vector<AllocationPolicy*> all(scenario->num_radars(), &shared_policy);
  return run_episode(std::move(scenario), seed, all, steps);
}

}  // namespace radarnet

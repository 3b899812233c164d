#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "radarnet/allocation.hpp"
#include "radarnet/cmaes.hpp"
#include "radarnet/scenario.hpp"

namespace radarnet::esto {

enum class Variant { kEsto, kEstoM };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

// Pseudo feature index that always reads 1.0.
inline constexpr int kConstantFeature = feature::kCount;

// ESTO: range, speed, closing speed, own area, staleness, budget left,
// closest-other-radar distance, other-FOV coverage, constant.
// ESTO-M appends the communicated estimated utility and its delta.
std::vector<int> feature_indices(Variant v);

struct PreferenceModel {
  Variant variant = Variant::kEsto;
  std::vector<int> feature_indices;
  Eigen::VectorXd weights;

  int dimension() const { return static_cast<int>(weights.size()); }
  void validate() const;

  static PreferenceModel make(Variant v, Eigen::VectorXd weights);
  static PreferenceModel zeros(Variant v);
};

Eigen::VectorXd preference_scores(const PreferenceModel& model, const Observation& obs);

// Highest score first, ties by target id; masked targets are skipped and
// unaffordable ones passed over.
Allocation select_by_score(std::span<const double> scores, const std::vector<bool>& fov_mask,
                           std::span<const double> costs, double budget, int radar_id = 0);

class EstoPolicy final : public AllocationPolicy {
 public:
  explicit EstoPolicy(PreferenceModel model);
  Allocation decide(const Observation& obs, const Radar& radar,
                    std::span<const double> costs) override;
  std::string name() const override { return variant_name(model_.variant); }
  const PreferenceModel& model() const { return model_; }

 private:
  PreferenceModel model_;
};

// Mean over seeds of the episode-mean utility with every radar running the
// model. Deterministic in (weights, scenario, seeds).
double fitness(const PreferenceModel& model, std::shared_ptr<const Scenario> scenario,
               std::span<const std::uint64_t> seeds, int steps = 0);

struct TrainingConfig {
  Variant variant = Variant::kEsto;
  std::shared_ptr<const Scenario> scenario;
  int generations = 50;
  int runs = 10;
  double sigma0 = 0.5;
  int lambda = 0;
  std::uint64_t seed = 1;
  std::uint64_t fitness_seed_base = 100000;  // runs use base, base + 1, ...
  int steps = 0;
  int threads = 1;

  std::vector<std::uint64_t> fitness_seeds() const;
};

struct TrainingResult {
  PreferenceModel model;
  double best_fitness = 0.0;
  std::vector<cmaes::GenerationRecord> history;
  std::vector<std::string> events;
};

// CMA-ES over the model weights. With a checkpoint path, state is written
// after every generation and an existing compatible checkpoint is resumed.
TrainingResult train(const TrainingConfig& config, const std::string& checkpoint_path = "",
                     const std::function<void(const cmaes::GenerationRecord&)>& on_generation = {});

nlohmann::json weights_to_json(const PreferenceModel& model, const std::string& scenario_hash,
                               int generations);
PreferenceModel weights_from_json(const nlohmann::json& j);
void save_weights(const PreferenceModel& model, const std::string& scenario_hash, int generations,
                  const std::string& path);
PreferenceModel load_weights(const std::string& path);

}  // namespace radarnet::esto

#include "radarnet/esto.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "radarnet/json_io.hpp"
#include "radarnet/parallel.hpp"
#include "radarnet/policy.hpp"
#include "radarnet/world.hpp"

namespace radarnet::esto {
namespace {

using nlohmann::json;

constexpr int kWeightsSchemaVersion = 1;
constexpr int kCheckpointSchemaVersion = 1;

}  // namespace

std::string variant_name(Variant v) { return v == Variant::kEsto ? "esto" : "esto-m"; }

Variant parse_variant(const std::string& name) {
  if (name == "esto") return Variant::kEsto;
  if (name == "esto-m") return Variant::kEstoM;
  throw ConfigError("variant", "expected esto or esto-m, got " + name);
}

std::vector<int> feature_indices(Variant v) {
  std::vector<int> idx = {feature::kRange,        feature::kSpeed,
                          feature::kClosingSpeed, feature::kOwnArea,
                          feature::kStaleness,    feature::kBudgetLeft,
                          feature::kOtherRadarDistance, feature::kOtherFovCoverage,
                          kConstantFeature};
  if (v == Variant::kEstoM) {
    idx.push_back(feature::kEstimatedUtility);
    idx.push_back(feature::kEstimatedUtilityDelta);
  }
  return idx;
}

void PreferenceModel::validate() const {
  if (feature_indices.size() != static_cast<std::size_t>(weights.size())) {
    throw std::invalid_argument("preference model has " + std::to_string(weights.size()) +
                                " weights for " + std::to_string(feature_indices.size()) +
                                " features");
  }
  for (int f : feature_indices) {
    if (f < 0 || f > kConstantFeature) {
      throw std::invalid_argument("feature index " + std::to_string(f) + " out of range");
    }
  }
  if (!weights.allFinite()) throw std::invalid_argument("preference weights must be finite");
}

PreferenceModel PreferenceModel::make(Variant v, Eigen::VectorXd weights) {
  PreferenceModel m{v, esto::feature_indices(v), std::move(weights)};
  m.validate();
  return m;
}

PreferenceModel PreferenceModel::zeros(Variant v) {
  return make(v, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(esto::feature_indices(v).size())));
}

Eigen::VectorXd preference_scores(const PreferenceModel& model, const Observation& obs) {
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(obs.num_targets());
  for (std::size_t k = 0; k < model.feature_indices.size(); ++k) {
    const int f = model.feature_indices[k];
    const double w = model.weights(static_cast<Eigen::Index>(k));
    if (f == kConstantFeature) {
      scores.array() += w;
    } else {
      scores += w * obs.rows.col(f);
    }
  }
  return scores;
}

Allocation select_by_score(std::span<const double> scores, const std::vector<bool>& fov_mask,
                           std::span<const double> costs, double budget, int radar_id) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return greedy_fill(radar_id, order, fov_mask, costs, budget);
}

EstoPolicy::EstoPolicy(PreferenceModel model) : model_(std::move(model)) { model_.validate(); }

Allocation EstoPolicy::decide(const Observation& obs, const Radar& radar,
                              std::span<const double> costs) {
  const Eigen::VectorXd scores = preference_scores(model_, obs);
  return select_by_score(std::span<const double>(scores.data(), scores.size()), obs.fov_mask,
                         costs, radar.budget, radar.id);
}

double fitness(const PreferenceModel& model, std::shared_ptr<const Scenario> scenario,
               std::span<const std::uint64_t> seeds, int steps) {
  if (seeds.empty()) throw std::invalid_argument("fitness needs at least one run");
  EstoPolicy policy(model);
  double total = 0.0;
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    try {
      const std::vector<double> u = run_episode(scenario, seeds[r], policy, steps);
      total += std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
    } catch (const std::exception& e) {
      throw std::runtime_error("fitness run " + std::to_string(r) + " (seed " +
                               std::to_string(seeds[r]) + "): " + e.what());
    }
  }
  return total / static_cast<double>(seeds.size());
}

std::vector<std::uint64_t> TrainingConfig::fitness_seeds() const {
  std::vector<std::uint64_t> seeds(runs);
  for (int r = 0; r < runs; ++r) seeds[r] = fitness_seed_base + static_cast<std::uint64_t>(r);
  return seeds;
}

TrainingResult train(const TrainingConfig& config, const std::string& checkpoint_path,
                     const std::function<void(const cmaes::GenerationRecord&)>& on_generation) {
  if (!config.scenario) throw std::invalid_argument("training needs a scenario");
  if (config.runs < 1) throw ConfigError("runs", "must be >= 1");
  if (config.generations < 1) throw ConfigError("generations", "must be >= 1");
  const int d = static_cast<int>(feature_indices(config.variant).size());
  const std::vector<std::uint64_t> seeds = config.fitness_seeds();
  const std::string hash = config.scenario->hash();

  json identity = {{"variant", variant_name(config.variant)},
                   {"scenario_hash", hash},
                   {"runs", config.runs},
                   {"fitness_seed_base", config.fitness_seed_base},
                   {"steps", config.steps},
                   {"seed", config.seed},
                   {"sigma0", config.sigma0},
                   {"lambda", config.lambda}};

  std::unique_ptr<cmaes::Optimizer> opt;
  if (!checkpoint_path.empty() && std::filesystem::exists(checkpoint_path)) {
    const json ck = read_json_file(checkpoint_path, "checkpoint");
    if (ck.value("schema_version", 0) != kCheckpointSchemaVersion) {
      throw ConfigError("checkpoint.schema_version", "unsupported checkpoint version");
    }
    if (ck.at("identity") != identity) {
      throw ConfigError("checkpoint", "checkpoint " + checkpoint_path +
                                          " was written for a different training setup");
    }
    opt = std::make_unique<cmaes::Optimizer>(cmaes::Optimizer::from_json(ck.at("optimizer")));
  } else {
    cmaes::Options o;
    o.dimension = d;
    o.sigma0 = config.sigma0;
    o.lambda = config.lambda;
    o.seed = config.seed;
    o.generations = config.generations;
    opt = std::make_unique<cmaes::Optimizer>(o);
  }

  while (opt->generation() < config.generations) {
    const std::vector<cmaes::Vector> population = opt->ask();
    std::vector<double> values(population.size());
    parallel_for(static_cast<int>(population.size()), config.threads, [&](int k) {
      values[k] = fitness(PreferenceModel::make(config.variant, population[k]), config.scenario,
                          seeds, config.steps);
    });
    opt->tell(values);
    if (!checkpoint_path.empty()) {
      write_json_atomically({{"schema_version", kCheckpointSchemaVersion},
                        {"identity", identity},
                        {"optimizer", opt->to_json()}},
                       checkpoint_path);
    }
    if (on_generation) on_generation(opt->history().back());
  }

  TrainingResult result;
  result.model = PreferenceModel::make(config.variant, opt->best_x());
  result.best_fitness = opt->best_fitness();
  result.history = opt->history();
  result.events = opt->events();
  return result;
}

json weights_to_json(const PreferenceModel& model, const std::string& scenario_hash,
                     int generations) {
  model.validate();
  return {{"schema_version", kWeightsSchemaVersion},
          {"variant", variant_name(model.variant)},
          {"d", model.dimension()},
          {"feature_indices", model.feature_indices},
          {"weights", std::vector<double>(model.weights.data(),
                                          model.weights.data() + model.weights.size())},
          {"scenario_hash", scenario_hash},
          {"generations", generations}};
}

PreferenceModel weights_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kWeightsSchemaVersion) {
      throw ConfigError("weights.schema_version", "unsupported version");
    }
    const Variant v = parse_variant(j.at("variant").get<std::string>());
    const auto idx = j.at("feature_indices").get<std::vector<int>>();
    if (idx != feature_indices(v)) {
      throw ConfigError("weights.feature_indices", "do not match variant " + variant_name(v));
    }
    const auto w = j.at("weights").get<std::vector<double>>();
    if (static_cast<int>(w.size()) != j.at("d").get<int>() || w.size() != idx.size()) {
      throw ConfigError("weights.weights", "expected " + std::to_string(idx.size()) + " values");
    }
    return PreferenceModel::make(v, Eigen::Map<const Eigen::VectorXd>(w.data(), w.size()));
  } catch (const json::exception& e) {
    throw ConfigError("weights", e.what());
  }
}

void save_weights(const PreferenceModel& model, const std::string& scenario_hash, int generations,
                  const std::string& path) {
  write_json_atomically(weights_to_json(model, scenario_hash, generations), path);
}

PreferenceModel load_weights(const std::string& path) {
  return weights_from_json(read_json_file(path, "weights"));
}

}  // namespace radarnet::esto

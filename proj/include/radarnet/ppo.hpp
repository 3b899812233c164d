#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "radarnet/actor.hpp"
#include "radarnet/critic.hpp"
#include "radarnet/dense.hpp"
#include "radarnet/scenario.hpp"

namespace radarnet::nn {

// Where discounting applies in the lifted process. Per macro-step keeps the
// lifted return equal to the base-model return; per micro-step also charges
// every extra target selection one factor of gamma.
enum class DiscountScope { kMacroStep, kMicroStep };

std::string discount_scope_name(DiscountScope s);
DiscountScope parse_discount_scope(const std::string& name);  // throws ConfigError

struct PpoConfig {
  int iterations = 20;
  int episodes = 4;  // per iteration
  int steps = 0;     // macro-steps per episode; <= 0 uses the scenario length
  double gamma = 0.99;
  double lambda = 0.95;
  DiscountScope discount_scope = DiscountScope::kMacroStep;
  double clip = 0.2;
  int epochs = 4;
  int minibatch = 512;
  double lr = 3e-4;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  std::uint64_t seed = 1;
  int threads = 0;  // <= 0: default_thread_count()
  int hidden = 16;
  int features = 6;
  int critic_hidden = 64;

  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;
  static PpoConfig from_json(const nlohmann::json& j);
};

// One micro-step of the lifted environment, or a terminal padding record
// that only trains the critic toward zero.
struct Sample {
  Matrix rows;
  std::vector<char> target_allowed;
  int action = 0;
  double log_prob = 0.0;
  bool forced = false;   // stop was the only legal action
  bool padding = false;  // post-terminal summary with return 0
  Vector summary;
  double value = 0.0;
  double reward = 0.0;
  bool terminal = false;
  bool macro_end = false;  // last micro-step of its macro-step
  double advantage = 0.0;
  double ret = 0.0;

  bool trains_policy() const { return !forced && !padding; }
};

struct RolloutBatch {
  std::vector<Sample> samples;  // episodes contiguous, padding after each
  std::vector<double> episode_utility;  // undiscounted mean step utility
};

// Samples `episodes` episodes with the stochastic actor. Episode e runs World
// seed `seed + e`. Advantages and returns are filled by GAE.
RolloutBatch rollout(std::shared_ptr<const Scenario> scenario, const ActorNet& actor,
                     const CriticNet& critic, int episodes, int steps, std::uint64_t seed,
                     double gamma, double lambda, int threads,
                     DiscountScope scope = DiscountScope::kMacroStep);

// Generalized advantage estimation over one contiguous episode (padding
// records excluded). The terminal sample bootstraps from 0. With macro-step
// scope, gamma and lambda only act across samples flagged macro_end.
void compute_gae(std::span<Sample> episode, double gamma, double lambda, DiscountScope scope);

struct LossParts {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Clipped-surrogate loss with entropy bonus and squared value error over one
// minibatch. Advantages are normalized across the minibatch's policy samples.
// Adds gradients when the output pointers are given.
LossParts minibatch_loss(const ActorNet& actor, const CriticNet& critic,
                         std::span<const Sample* const> batch, const PpoConfig& config,
                         Vector* actor_grad, Vector* critic_grad);

struct UpdateReport {
  LossParts loss;  // averaged over minibatches
  bool aborted = false;
  std::string diagnostic;
};

// Epochs of shuffled minibatch steps. Any non-finite loss or gradient
// restores the pre-update parameters and optimizer state.
UpdateReport ppo_update(ActorNet& actor, CriticNet& critic, Adam& actor_opt, Adam& critic_opt,
                        const RolloutBatch& batch, const PpoConfig& config, std::uint64_t seed);

struct IterationRecord {
  int iteration = 0;
  double mean_utility = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  std::size_t samples = 0;
  bool aborted = false;
};

struct PpoState {
  PpoConfig config;
  std::string scenario_hash;
  ActorNet actor;
  CriticNet critic;
  Adam actor_opt;
  Adam critic_opt;
  int iteration = 0;  // completed iterations
  std::vector<IterationRecord> history;
  std::vector<std::string> events;

  static PpoState initial(const PpoConfig& config, const Scenario& scenario);
  nlohmann::json to_json() const;
  static PpoState from_json(const nlohmann::json& j);
};

void save_checkpoint(const PpoState& state, const std::string& path);
PpoState load_checkpoint(const std::string& path);

// Runs (or resumes from `checkpoint_path` when it holds a matching state)
// until config.iterations are done, checkpointing after each iteration.
using IterationCallback = std::function<void(const IterationRecord&)>;
PpoState train(const PpoConfig& config, std::shared_ptr<const Scenario> scenario,
               const std::string& checkpoint_path = "",
               const IterationCallback& on_iteration = nullptr);

}  // namespace radarnet::nn

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "radarnet/allocation.hpp"
#include "radarnet/dense.hpp"

namespace radarnet::nn {

// Symmetric per-target actor shared by every radar. A two-layer extractor
// maps each feature row to f_i; target scores are
//   w_i = T(f_i) + (sum_{j != i} O(f_j)) / (m - 1)
// and the stop action scores a learned scalar.
struct ActorNet {
  DenseSpec extractor;
  // extractor | T weights (f), T bias | O weights (f) | stop bias
  Vector params;

  static ActorNet make(std::mt19937_64& rng, int hidden = 16, int features = 6);

  int feature_width() const { return extractor.output_size(); }
  int t_offset() const { return extractor.num_params(); }
  int o_offset() const { return t_offset() + feature_width() + 1; }
  int stop_offset() const { return o_offset() + feature_width(); }
  int num_params() const { return stop_offset() + 1; }

  nlohmann::json to_json() const;
  static ActorNet from_json(const nlohmann::json& j);
};

// One forward evaluation over an m-row observation. Index m is the stop action.
struct ActorPass {
  DenseSpec::Cache cache;
  Matrix features;             // m x f
  Vector scores;               // m + 1
  Vector probs;                // m + 1, zero outside `allowed`
  std::vector<char> allowed;   // m + 1
  bool forced_stop = false;    // no target was allowed
};

// `target_allowed` has m entries. The stop action is always allowed; when no
// target is, the result is a point mass on stop.
ActorPass actor_forward(const ActorNet& net, const Matrix& rows,
                        const std::vector<char>& target_allowed);

// Adds dL/dparams to `grad` given dL/dscores (m + 1 entries).
void actor_backward(const ActorNet& net, const ActorPass& pass, const Vector& d_scores,
                    ParamSpan grad);

// d log pi(action) / d scores; zero outside the allowed set.
Vector log_prob_score_grad(const ActorPass& pass, int action);
double entropy(const ActorPass& pass);
Vector entropy_score_grad(const ActorPass& pass);

// Targets selectable in the current micro-step: in FOV, not yet picked and
// affordable from `remaining`.
std::vector<char> selectable_targets(const std::vector<bool>& fov_mask,
                                     const std::vector<char>& selected,
                                     std::span<const double> costs, double remaining);

// Runs one radar's micro-step sequence: pick, update the budget features,
// repeat until stop. `choose` returns an action index from the pass;
// `on_step` (optional) sees each micro-step's input rows, pass and action.
using ActionChooser = std::function<int(const ActorPass&)>;
using MicroStepHook = std::function<void(const Matrix& rows, const ActorPass& pass, int action)>;
Allocation run_sequence(const ActorNet& net, const Observation& obs, const Radar& radar,
                        std::span<const double> costs, const ActionChooser& choose,
                        const MicroStepHook& on_step = nullptr);

int argmax_action(const ActorPass& pass);
int sample_action(const ActorPass& pass, std::mt19937_64& rng);

// Execution policy shared by every radar. kSample draws from the learned
// distribution (the policy PPO optimizes); kArgmax takes the mode at every
// micro-step.
class ActorPolicy : public AllocationPolicy {
 public:
  enum class Mode { kSample, kArgmax };

  ActorPolicy(ActorNet net, Mode mode, std::uint64_t seed = 0)
      : net_(std::move(net)), mode_(mode), rng_(seed) {}
  Allocation decide(const Observation& obs, const Radar& radar,
                    std::span<const double> costs) override;
  std::string name() const override { return "rl"; }
  const ActorNet& net() const { return net_; }

 private:
  ActorNet net_;
  Mode mode_;
  std::mt19937_64 rng_;
};

}  // namespace radarnet::nn

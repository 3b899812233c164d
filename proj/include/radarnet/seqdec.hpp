#pragma once

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

// Finite Dec-POMDPs whose per-agent actions are subsets of m targets, the
// sequential-choice lift where agents pick targets one at a time until they
// play the stop action, and the maps between the two policy classes.
namespace radarnet::seqdec {

// Bitmask over targets 0 .. m-1.
using Subset = std::uint32_t;

inline constexpr int kMaxTargets = 8;
inline constexpr double kEnumerationLimit = 1e7;

int popcount(Subset s);

// Reactive (observation-conditioned) model. At every step the joint
// observation is drawn from the current state, agents act, then the state
// transitions and the reward R(s, a, s') is collected.
struct FiniteDecPOMDP {
  int n = 1;                     // agents
  int m = 1;                     // targets; per-agent actions are 2^m subsets
  int num_states = 1;
  std::vector<int> num_obs;      // per agent
  int horizon = 1;
  std::vector<double> rho;       // [s]
  std::vector<double> P;         // [s][a][s'], a = joint action index
  std::vector<double> R;         // [s][a][s']
  std::vector<double> O;         // [s][w], w = joint observation index

  int num_subsets() const { return 1 << m; }
  int num_joint_actions() const;
  int num_joint_obs() const;

  // Joint index packing: agent 0 is the least significant digit.
  int joint_action(const std::vector<Subset>& subsets) const;
  std::vector<Subset> split_action(int joint) const;
  std::vector<int> split_obs(int joint) const;

  double p(int s, int a, int s2) const;
  double r(int s, int a, int s2) const;
  double o(int s, int w) const;

  // Throws std::invalid_argument on shape errors or rows not summing to 1
  // within 1e-12.
  void validate() const;
};

// pi[k][w][subset]
struct PolicyTable {
  int m = 1;
  std::vector<std::vector<std::vector<double>>> probs;

  int num_agents() const { return static_cast<int>(probs.size()); }
  void validate(double tol = 1e-12) const;
};

// Sequential action index: 0 .. m-1 are targets, m is the stop action.
// probs[k][w][selected][action]; entries for already selected targets are 0.
struct SeqPolicyTable {
  int m = 1;
  std::vector<std::vector<std::vector<std::vector<double>>>> probs;

  int stop() const { return m; }
  int num_agents() const { return static_cast<int>(probs.size()); }
  void validate(double tol = 1e-12) const;
};

// Sum over every selection order of the product of sequential choice
// probabilities, ending with the stop action.
PolicyTable transpose(const SeqPolicyTable& pi_prime);

// Sequential policy whose transposition is `pi`; unreachable prefixes stop.
SeqPolicyTable invert(const PolicyTable& pi);

// Exact expected reward sum over the horizon by forward propagation of the
// state distribution.
double value(const FiniteDecPOMDP& model, const PolicyTable& pi);

// Composite state s (x) (selections, finished flags). `plain` marks the
// initial states that have not been through a micro-step yet; they behave
// like s (x) empty.
struct LiftedState {
  int base = 0;
  bool plain = false;
  std::vector<Subset> selected;
  Subset finished = 0;  // bit k: agent k already played stop this macro-step

  bool operator==(const LiftedState&) const = default;
};

struct LiftedTransition {
  int next = 0;  // index into LiftedDecPOMDP::states
  double probability = 0.0;
  double reward = 0.0;
};

// Micro-actions for all agents; finished agents must play stop.
using MicroAction = std::vector<int>;

struct LiftedDecPOMDP {
  FiniteDecPOMDP base;
  std::vector<LiftedState> states;  // every reachable composite state

  int index_of(const LiftedState& s) const;
  // Targets not yet selected plus stop; only stop once finished.
  std::vector<int> allowed_actions(int state, int agent) const;
  // All agents finished after this action fires the base transition with
  // its reward into s' (x) empty; anything else appends the chosen targets
  // deterministically with reward 0.
  std::vector<LiftedTransition> step(int state, const MicroAction& action) const;
};

LiftedDecPOMDP lift(const FiniteDecPOMDP& model);

// Exact expected reward in the lifted process. The joint observation is
// drawn once per macro-step and held through its micro-steps.
double value_lifted(const LiftedDecPOMDP& lifted, const SeqPolicyTable& pi_prime);

// Random instances for the property suites.
FiniteDecPOMDP random_model(std::mt19937_64& rng, int n, int m, int num_states, int obs_per_agent,
                            int horizon);
PolicyTable random_policy(std::mt19937_64& rng, int n, int m, const std::vector<int>& num_obs,
                          double sparsity = 0.0);
SeqPolicyTable random_seq_policy(std::mt19937_64& rng, int n, int m,
                                 const std::vector<int>& num_obs);

// All deterministic policies (one subset per observation).
std::vector<PolicyTable> deterministic_policies(int m, const std::vector<int>& num_obs);
std::vector<SeqPolicyTable> deterministic_seq_policies(int m, const std::vector<int>& num_obs);

double max_abs_difference(const PolicyTable& a, const PolicyTable& b);

nlohmann::json model_to_json(const FiniteDecPOMDP& model);
FiniteDecPOMDP model_from_json(const nlohmann::json& j);

}  // namespace radarnet::seqdec

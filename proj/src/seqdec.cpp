#include "radarnet/seqdec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace radarnet::seqdec {
namespace {

using nlohmann::json;

void check_row(double sum, double tol, const std::string& what) {
  if (std::abs(sum - 1.0) > tol) {
    std::ostringstream msg;
    msg << what << " sums to " << sum;
    throw std::invalid_argument(msg.str());
  }
}

void check_m(int m) {
  if (m < 1 || m > kMaxTargets) {
    throw std::invalid_argument("number of targets must be in [1, " +
                                std::to_string(kMaxTargets) + "], got " + std::to_string(m));
  }
}

// a (a - 1) ... (a - k + 1)
double falling(int a, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= a - i;
  return out;
}

double factorial(int k) { return falling(k, k); }

std::vector<int> observation_counts(const PolicyTable& pi) {
  std::vector<int> out;
  for (const auto& agent : pi.probs) out.push_back(static_cast<int>(agent.size()));
  return out;
}

std::vector<int> observation_counts(const SeqPolicyTable& pi) {
  std::vector<int> out;
  for (const auto& agent : pi.probs) out.push_back(static_cast<int>(agent.size()));
  return out;
}

void check_compatible(const FiniteDecPOMDP& model, int policy_m, const std::vector<int>& obs) {
  if (policy_m != model.m || obs != model.num_obs) {
    throw std::invalid_argument("policy shape does not match the model");
  }
}

void guard(const FiniteDecPOMDP& model, double work) {
  if (work > kEnumerationLimit) {
    std::ostringstream msg;
    msg << "exact evaluation needs ~" << work << " operations (T=" << model.horizon
        << ", |S|=" << model.num_states << ", |joint obs|=" << model.num_joint_obs()
        << ", |joint actions|=" << model.num_joint_actions() << "), limit "
        << kEnumerationLimit;
    throw std::invalid_argument(msg.str());
  }
}

void walk(const SeqPolicyTable& pi, int k, int w, Subset selected, double prob,
          std::vector<double>& out) {
  const std::vector<double>& dist = pi.probs[k][w][selected];
  out[selected] += prob * dist[pi.stop()];
  for (int j = 0; j < pi.m; ++j) {
    if (selected & (Subset{1} << j)) continue;
    if (dist[j] == 0.0) continue;
    walk(pi, k, w, selected | (Subset{1} << j), prob * dist[j], out);
  }
}

std::vector<double> random_simplex(std::mt19937_64& rng, int size, double sparsity) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(size);
  double sum = 0.0;
  for (double& x : v) {
    x = u(rng) < sparsity ? 0.0 : -std::log(1.0 - u(rng));
    sum += x;
  }
  if (sum == 0.0) {
    v[std::uniform_int_distribution<int>(0, size - 1)(rng)] = 1.0;
    sum = 1.0;
  }
  for (double& x : v) x /= sum;
  return v;
}

json vec(const std::vector<double>& v) { return v; }

}  // namespace

int popcount(Subset s) { return std::popcount(s); }

int FiniteDecPOMDP::num_joint_actions() const { return 1 << (m * n); }

int FiniteDecPOMDP::num_joint_obs() const {
  int out = 1;
  for (int c : num_obs) out *= c;
  return out;
}

int FiniteDecPOMDP::joint_action(const std::vector<Subset>& subsets) const {
  int out = 0;
  for (int k = n - 1; k >= 0; --k) out = (out << m) | static_cast<int>(subsets[k]);
  return out;
}

std::vector<Subset> FiniteDecPOMDP::split_action(int joint) const {
  std::vector<Subset> out(n);
  for (int k = 0; k < n; ++k) {
    out[k] = static_cast<Subset>(joint) & ((Subset{1} << m) - 1);
    joint >>= m;
  }
  return out;
}

std::vector<int> FiniteDecPOMDP::split_obs(int joint) const {
  std::vector<int> out(n);
  for (int k = 0; k < n; ++k) {
    out[k] = joint % num_obs[k];
    joint /= num_obs[k];
  }
  return out;
}

double FiniteDecPOMDP::p(int s, int a, int s2) const {
  return P[(static_cast<std::size_t>(s) * num_joint_actions() + a) * num_states + s2];
}

double FiniteDecPOMDP::r(int s, int a, int s2) const {
  return R[(static_cast<std::size_t>(s) * num_joint_actions() + a) * num_states + s2];
}

double FiniteDecPOMDP::o(int s, int w) const {
  return O[static_cast<std::size_t>(s) * num_joint_obs() + w];
}

void FiniteDecPOMDP::validate() const {
  if (n < 1) throw std::invalid_argument("need at least one agent");
  check_m(m);
  if (m * n > 16) throw std::invalid_argument("joint action space too large");
  if (num_states < 1) throw std::invalid_argument("need at least one state");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (static_cast<int>(num_obs.size()) != n) throw std::invalid_argument("num_obs needs n entries");
  for (int c : num_obs) {
    if (c < 1) throw std::invalid_argument("each agent needs at least one observation");
  }
  const std::size_t S = num_states, A = num_joint_actions(), W = num_joint_obs();
  if (rho.size() != S || P.size() != S * A * S || R.size() != S * A * S || O.size() != S * W) {
    throw std::invalid_argument("table sizes do not match the model dimensions");
  }
  auto nonneg = [](const std::vector<double>& t, const char* name) {
    for (double x : t) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument(std::string(name) + " has a negative or non-finite entry");
      }
    }
  };
  nonneg(rho, "rho");
  nonneg(P, "P");
  nonneg(O, "O");
  for (double x : R) {
    if (!std::isfinite(x)) throw std::invalid_argument("R has a non-finite entry");
  }
  check_row(std::accumulate(rho.begin(), rho.end(), 0.0), 1e-12, "rho");
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      double sum = 0.0;
      for (std::size_t s2 = 0; s2 < S; ++s2) sum += P[(s * A + a) * S + s2];
      check_row(sum, 1e-12, "P(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ", .)");
    }
    double sum = 0.0;
    for (std::size_t w = 0; w < W; ++w) sum += O[s * W + w];
    check_row(sum, 1e-12, "O(s=" + std::to_string(s) + ", .)");
  }
}

void PolicyTable::validate(double tol) const {
  check_m(m);
  for (std::size_t k = 0; k < probs.size(); ++k) {
    for (std::size_t w = 0; w < probs[k].size(); ++w) {
      const auto& d = probs[k][w];
      if (d.size() != (std::size_t{1} << m)) {
        throw std::invalid_argument("policy row needs 2^m entries");
      }
      for (double x : d) {
        if (!(x >= 0.0)) throw std::invalid_argument("policy has a negative entry");
      }
      check_row(std::accumulate(d.begin(), d.end(), 0.0), tol,
                "pi[" + std::to_string(k) + "][" + std::to_string(w) + "]");
    }
  }
}

void SeqPolicyTable::validate(double tol) const {
  check_m(m);
  const std::size_t subsets = std::size_t{1} << m;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    for (std::size_t w = 0; w < probs[k].size(); ++w) {
      if (probs[k][w].size() != subsets) {
        throw std::invalid_argument("sequential policy needs one row per selection");
      }
      for (Subset e = 0; e < subsets; ++e) {
        const auto& d = probs[k][w][e];
        if (d.size() != static_cast<std::size_t>(m + 1)) {
          throw std::invalid_argument("sequential policy row needs m + 1 entries");
        }
        for (int j = 0; j <= m; ++j) {
          if (!(d[j] >= 0.0)) throw std::invalid_argument("sequential policy has a negative entry");
          if (j < m && (e & (Subset{1} << j)) && d[j] != 0.0) {
            throw std::invalid_argument("sequential policy reselects an already chosen target");
          }
        }
        check_row(std::accumulate(d.begin(), d.end(), 0.0), tol,
                  "pi'[" + std::to_string(k) + "][" + std::to_string(w) + "][" +
                      std::to_string(e) + "]");
      }
    }
  }
}

PolicyTable transpose(const SeqPolicyTable& pi_prime) {
  check_m(pi_prime.m);
  pi_prime.validate();
  PolicyTable out;
  out.m = pi_prime.m;
  out.probs.resize(pi_prime.num_agents());
  for (int k = 0; k < pi_prime.num_agents(); ++k) {
    for (std::size_t w = 0; w < pi_prime.probs[k].size(); ++w) {
      std::vector<double> dist(std::size_t{1} << pi_prime.m, 0.0);
      walk(pi_prime, k, static_cast<int>(w), 0, 1.0, dist);
      out.probs[k].push_back(std::move(dist));
    }
  }
  return out;
}

SeqPolicyTable invert(const PolicyTable& pi) {
  check_m(pi.m);
  pi.validate();
  const int m = pi.m;
  const Subset subsets = Subset{1} << m;
  SeqPolicyTable out;
  out.m = m;
  out.probs.resize(pi.num_agents());
  for (int k = 0; k < pi.num_agents(); ++k) {
    for (const std::vector<double>& dist : pi.probs[k]) {
      std::vector<std::vector<double>> rows(subsets, std::vector<double>(m + 1, 0.0));
      for (Subset e = 0; e < subsets; ++e) {
        const int size = popcount(e);
        const double size_fact = factorial(size);
        double norm = 0.0;
        std::vector<double> towards(m, 0.0);
        for (Subset a = 0; a < subsets; ++a) {
          if ((a & e) != e || dist[a] == 0.0) continue;
          const int asize = popcount(a);
          norm += dist[a] * size_fact / falling(asize, size);
          if (a == e) continue;
          const double weight = dist[a] * size_fact / falling(asize, size + 1);
          for (int j = 0; j < m; ++j) {
            if ((a & ~e) & (Subset{1} << j)) towards[j] += weight;
          }
        }
        if (norm == 0.0) {
          rows[e][m] = 1.0;
          continue;
        }
        rows[e][m] = dist[e] / norm;
        for (int j = 0; j < m; ++j) rows[e][j] = towards[j] / norm;
      }
      out.probs[k].push_back(std::move(rows));
    }
  }
  return out;
}

double value(const FiniteDecPOMDP& model, const PolicyTable& pi) {
  model.validate();
  pi.validate();
  check_compatible(model, pi.m, observation_counts(pi));
  const int S = model.num_states, A = model.num_joint_actions(), W = model.num_joint_obs();
  guard(model, static_cast<double>(model.horizon) * S * W * A * S);

  // joint[w][a] = prod_k pi_k(a_k | w_k)
  std::vector<double> joint(static_cast<std::size_t>(W) * A);
  for (int w = 0; w < W; ++w) {
    const std::vector<int> ws = model.split_obs(w);
    for (int a = 0; a < A; ++a) {
      const std::vector<Subset> as = model.split_action(a);
      double q = 1.0;
      for (int k = 0; k < model.n && q != 0.0; ++k) q *= pi.probs[k][ws[k]][as[k]];
      joint[static_cast<std::size_t>(w) * A + a] = q;
    }
  }

  std::vector<double> dist = model.rho;
  double total = 0.0;
  for (int t = 0; t < model.horizon; ++t) {
    std::vector<double> next(S, 0.0);
    for (int s = 0; s < S; ++s) {
      if (dist[s] == 0.0) continue;
      for (int w = 0; w < W; ++w) {
        const double pw = dist[s] * model.o(s, w);
        if (pw == 0.0) continue;
        for (int a = 0; a < A; ++a) {
          const double pa = pw * joint[static_cast<std::size_t>(w) * A + a];
          if (pa == 0.0) continue;
          for (int s2 = 0; s2 < S; ++s2) {
            const double p = pa * model.p(s, a, s2);
            total += p * model.r(s, a, s2);
            next[s2] += p;
          }
        }
      }
    }
    dist = std::move(next);
  }
  return total;
}

namespace {

std::vector<int> state_key(const LiftedState& s) {
  std::vector<int> key = {s.base, s.plain ? 1 : 0, static_cast<int>(s.finished)};
  for (Subset e : s.selected) key.push_back(static_cast<int>(e));
  return key;
}

// Deterministic successor for a micro-action that leaves someone unfinished.
LiftedState advance(const LiftedState& s, const MicroAction& action, int stop) {
  LiftedState out = s;
  out.plain = false;
  for (std::size_t k = 0; k < action.size(); ++k) {
    if (action[k] == stop) {
      out.finished |= Subset{1} << k;
    } else {
      out.selected[k] |= Subset{1} << action[k];
    }
  }
  return out;
}

}  // namespace

int LiftedDecPOMDP::index_of(const LiftedState& s) const {
  // states is sorted by key (built from an ordered map).
  const std::vector<int> key = state_key(s);
  const auto it = std::lower_bound(
      states.begin(), states.end(), key,
      [](const LiftedState& a, const std::vector<int>& k) { return state_key(a) < k; });
  if (it == states.end() || !(*it == s)) return -1;
  return static_cast<int>(it - states.begin());
}

std::vector<int> LiftedDecPOMDP::allowed_actions(int state, int agent) const {
  const LiftedState& s = states.at(state);
  const int stop = base.m;
  if (s.finished & (Subset{1} << agent)) return {stop};
  std::vector<int> out;
  for (int j = 0; j < base.m; ++j) {
    if (!(s.selected[agent] & (Subset{1} << j))) out.push_back(j);
  }
  out.push_back(stop);
  return out;
}

std::vector<LiftedTransition> LiftedDecPOMDP::step(int state, const MicroAction& action) const {
  const LiftedState& s = states.at(state);
  const int stop = base.m;
  if (static_cast<int>(action.size()) != base.n) {
    throw std::invalid_argument("micro-action needs one entry per agent");
  }
  for (int k = 0; k < base.n; ++k) {
    const std::vector<int> allowed = allowed_actions(state, k);
    if (std::find(allowed.begin(), allowed.end(), action[k]) == allowed.end()) {
      throw std::invalid_argument("micro-action not allowed for agent " + std::to_string(k));
    }
  }
  const LiftedState moved = advance(s, action, stop);
  const Subset all = (Subset{1} << base.n) - 1;
  if (moved.finished != all) {
    return {{index_of(moved), 1.0, 0.0}};
  }
  const int a = base.joint_action(moved.selected);
  std::vector<LiftedTransition> out;
  for (int s2 = 0; s2 < base.num_states; ++s2) {
    const double p = base.p(s.base, a, s2);
    if (p == 0.0) continue;
    LiftedState fresh;
    fresh.base = s2;
    fresh.selected.assign(base.n, 0);
    out.push_back({index_of(fresh), p, base.r(s.base, a, s2)});
  }
  return out;
}

LiftedDecPOMDP lift(const FiniteDecPOMDP& model) {
  model.validate();
  LiftedDecPOMDP out;
  out.base = model;
  const int n = model.n, m = model.m, stop = m;
  const Subset all = (Subset{1} << n) - 1;

  std::map<std::vector<int>, LiftedState> found;
  std::vector<LiftedState> frontier;
  auto visit = [&](const LiftedState& s) {
    if (found.emplace(state_key(s), s).second) frontier.push_back(s);
  };
  for (int s = 0; s < model.num_states; ++s) {
    LiftedState plain{s, true, std::vector<Subset>(n, 0), 0};
    if (model.rho[s] > 0.0) visit(plain);
    // Every base state can be entered after a transition for some action.
    visit(LiftedState{s, false, std::vector<Subset>(n, 0), 0});
  }
  while (!frontier.empty()) {
    const LiftedState s = frontier.back();
    frontier.pop_back();
    // Enumerate joint micro-actions with a mixed-radix counter.
    std::vector<std::vector<int>> choices(n);
    for (int k = 0; k < n; ++k) {
      if (s.finished & (Subset{1} << k)) {
        choices[k] = {stop};
        continue;
      }
      for (int j = 0; j < m; ++j) {
        if (!(s.selected[k] & (Subset{1} << j))) choices[k].push_back(j);
      }
      choices[k].push_back(stop);
    }
    std::vector<std::size_t> digit(n, 0);
    while (true) {
      MicroAction action(n);
      for (int k = 0; k < n; ++k) action[k] = choices[k][digit[k]];
      const LiftedState moved = advance(s, action, stop);
      if (moved.finished != all) visit(moved);
      int k = 0;
      while (k < n && ++digit[k] == choices[k].size()) digit[k++] = 0;
      if (k == n) break;
    }
  }
  for (auto& [key, s] : found) out.states.push_back(s);
  return out;
}

double value_lifted(const LiftedDecPOMDP& lifted, const SeqPolicyTable& pi_prime) {
  const FiniteDecPOMDP& model = lifted.base;
  pi_prime.validate();
  check_compatible(model, pi_prime.m, observation_counts(pi_prime));
  const int n = model.n, S = model.num_states, W = model.num_joint_obs(), stop = model.m;
  guard(model, static_cast<double>(model.horizon) * W * static_cast<double>(lifted.states.size()) *
                   std::pow(model.m + 1.0, n) * S);

  // Distribution over macro-step start states (lifted indices).
  std::map<int, double> dist;
  for (int s = 0; s < S; ++s) {
    if (model.rho[s] == 0.0) continue;
    dist[lifted.index_of(LiftedState{s, true, std::vector<Subset>(n, 0), 0})] += model.rho[s];
  }

  double total = 0.0;
  for (int t = 0; t < model.horizon; ++t) {
    std::map<int, double> next;
    for (const auto& [start, ps] : dist) {
      const int base_state = lifted.states[start].base;
      for (int w = 0; w < W; ++w) {
        const double pw = ps * model.o(base_state, w);
        if (pw == 0.0) continue;
        const std::vector<int> ws = model.split_obs(w);
        // Micro-steps within the macro-step under the held observation.
        std::map<int, double> micro = {{start, pw}};
        while (!micro.empty()) {
          std::map<int, double> following;
          for (const auto& [state, pm] : micro) {
            std::vector<std::vector<int>> choices(n);
            for (int k = 0; k < n; ++k) choices[k] = lifted.allowed_actions(state, k);
            std::vector<std::size_t> digit(n, 0);
            const LiftedState& ls = lifted.states[state];
            while (true) {
              MicroAction action(n);
              double pa = pm;
              for (int k = 0; k < n && pa != 0.0; ++k) {
                action[k] = choices[k][digit[k]];
                if (!(ls.finished & (Subset{1} << k))) {
                  pa *= pi_prime.probs[k][ws[k]][ls.selected[k]][action[k]];
                }
              }
              if (pa != 0.0) {
                // Micro-steps never return to an empty unfinished selection, so
                // all agents stopping is the only way to fire the base step.
                const bool fired = std::all_of(action.begin(), action.end(),
                                               [&](int a) { return a == stop; });
                for (const LiftedTransition& tr : lifted.step(state, action)) {
                  const double p = pa * tr.probability;
                  total += p * tr.reward;
                  (fired ? next : following)[tr.next] += p;
                }
              }
              int k = 0;
              while (k < n && ++digit[k] == choices[k].size()) digit[k++] = 0;
              if (k == n) break;
            }
          }
          micro = std::move(following);
        }
      }
    }
    dist = std::move(next);
  }
  return total;
}

FiniteDecPOMDP random_model(std::mt19937_64& rng, int n, int m, int num_states, int obs_per_agent,
                            int horizon) {
  FiniteDecPOMDP model;
  model.n = n;
  model.m = m;
  model.num_states = num_states;
  model.num_obs.assign(n, obs_per_agent);
  model.horizon = horizon;
  const int S = num_states, A = model.num_joint_actions(), W = model.num_joint_obs();
  model.rho = random_simplex(rng, S, 0.0);
  std::uniform_real_distribution<double> reward(-1.0, 1.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const std::vector<double> row = random_simplex(rng, S, 0.3);
      model.P.insert(model.P.end(), row.begin(), row.end());
      for (int s2 = 0; s2 < S; ++s2) model.R.push_back(reward(rng));
    }
    const std::vector<double> obs = random_simplex(rng, W, 0.2);
    model.O.insert(model.O.end(), obs.begin(), obs.end());
  }
  model.validate();
  return model;
}

PolicyTable random_policy(std::mt19937_64& rng, int n, int m, const std::vector<int>& num_obs,
                          double sparsity) {
  check_m(m);
  PolicyTable pi;
  pi.m = m;
  pi.probs.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int w = 0; w < num_obs[k]; ++w) {
      pi.probs[k].push_back(random_simplex(rng, 1 << m, sparsity));
    }
  }
  return pi;
}

SeqPolicyTable random_seq_policy(std::mt19937_64& rng, int n, int m,
                                 const std::vector<int>& num_obs) {
  check_m(m);
  SeqPolicyTable pi;
  pi.m = m;
  pi.probs.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int w = 0; w < num_obs[k]; ++w) {
      std::vector<std::vector<double>> rows;
      for (Subset e = 0; e < (Subset{1} << m); ++e) {
        std::vector<int> allowed;
        for (int j = 0; j < m; ++j) {
          if (!(e & (Subset{1} << j))) allowed.push_back(j);
        }
        allowed.push_back(m);
        const std::vector<double> mass =
            random_simplex(rng, static_cast<int>(allowed.size()), 0.0);
        std::vector<double> row(m + 1, 0.0);
        for (std::size_t i = 0; i < allowed.size(); ++i) row[allowed[i]] = mass[i];
        rows.push_back(std::move(row));
      }
      pi.probs[k].push_back(std::move(rows));
    }
  }
  return pi;
}

std::vector<PolicyTable> deterministic_policies(int m, const std::vector<int>& num_obs) {
  check_m(m);
  const int n = static_cast<int>(num_obs.size());
  int slots = 0;
  for (int c : num_obs) slots += c;
  const double count = std::pow(double(1 << m), slots);
  if (count > 1e6) throw std::invalid_argument("too many deterministic policies to enumerate");
  std::vector<PolicyTable> out;
  std::vector<int> digit(slots, 0);
  while (true) {
    PolicyTable pi;
    pi.m = m;
    pi.probs.resize(n);
    int slot = 0;
    for (int k = 0; k < n; ++k) {
      for (int w = 0; w < num_obs[k]; ++w) {
        std::vector<double> row(1 << m, 0.0);
        row[digit[slot++]] = 1.0;
        pi.probs[k].push_back(std::move(row));
      }
    }
    out.push_back(std::move(pi));
    int i = 0;
    while (i < slots && ++digit[i] == (1 << m)) digit[i++] = 0;
    if (i == slots) break;
  }
  return out;
}

std::vector<SeqPolicyTable> deterministic_seq_policies(int m, const std::vector<int>& num_obs) {
  check_m(m);
  const int n = static_cast<int>(num_obs.size());
  const Subset subsets = Subset{1} << m;
  // One slot per (agent, observation, selection), radix = allowed actions.
  std::vector<int> radix;
  for (int k = 0; k < n; ++k) {
    for (int w = 0; w < num_obs[k]; ++w) {
      for (Subset e = 0; e < subsets; ++e) radix.push_back(m - popcount(e) + 1);
    }
  }
  double count = 1.0;
  for (int r : radix) count *= r;
  if (count > 1e6) throw std::invalid_argument("too many deterministic policies to enumerate");
  std::vector<SeqPolicyTable> out;
  std::vector<int> digit(radix.size(), 0);
  while (true) {
    SeqPolicyTable pi;
    pi.m = m;
    pi.probs.resize(n);
    std::size_t slot = 0;
    for (int k = 0; k < n; ++k) {
      for (int w = 0; w < num_obs[k]; ++w) {
        std::vector<std::vector<double>> rows;
        for (Subset e = 0; e < subsets; ++e) {
          std::vector<int> allowed;
          for (int j = 0; j < m; ++j) {
            if (!(e & (Subset{1} << j))) allowed.push_back(j);
          }
          allowed.push_back(m);
          std::vector<double> row(m + 1, 0.0);
          row[allowed[digit[slot++]]] = 1.0;
          rows.push_back(std::move(row));
        }
        pi.probs[k].push_back(std::move(rows));
      }
    }
    out.push_back(std::move(pi));
    std::size_t i = 0;
    while (i < radix.size() && ++digit[i] == radix[i]) digit[i++] = 0;
    if (i == radix.size()) break;
  }
  return out;
}

double max_abs_difference(const PolicyTable& a, const PolicyTable& b) {
  if (a.m != b.m || a.probs.size() != b.probs.size()) {
    throw std::invalid_argument("policy tables have different shapes");
  }
  double out = 0.0;
  for (std::size_t k = 0; k < a.probs.size(); ++k) {
    if (a.probs[k].size() != b.probs[k].size()) {
      throw std::invalid_argument("policy tables have different shapes");
    }
    for (std::size_t w = 0; w < a.probs[k].size(); ++w) {
      for (std::size_t e = 0; e < a.probs[k][w].size(); ++e) {
        out = std::max(out, std::abs(a.probs[k][w][e] - b.probs[k][w][e]));
      }
    }
  }
  return out;
}

json model_to_json(const FiniteDecPOMDP& model) {
  return {{"n", model.n},           {"m", model.m},         {"num_states", model.num_states},
          {"num_obs", model.num_obs}, {"horizon", model.horizon}, {"rho", vec(model.rho)},
          {"P", vec(model.P)},       {"R", vec(model.R)},    {"O", vec(model.O)}};
}

FiniteDecPOMDP model_from_json(const json& j) {
  FiniteDecPOMDP model;
  model.n = j.at("n").get<int>();
  model.m = j.at("m").get<int>();
  model.num_states = j.at("num_states").get<int>();
  model.num_obs = j.at("num_obs").get<std::vector<int>>();
  model.horizon = j.at("horizon").get<int>();
  model.rho = j.at("rho").get<std::vector<double>>();
  model.P = j.at("P").get<std::vector<double>>();
  model.R = j.at("R").get<std::vector<double>>();
  model.O = j.at("O").get<std::vector<double>>();
  model.validate();
  return model;
}

}  // namespace radarnet::seqdec

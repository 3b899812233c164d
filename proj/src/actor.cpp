#include "radarnet/actor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace radarnet::nn {
namespace {

// Summing in sorted order makes the result independent of row order, which
// keeps the actor exactly permutation-equivariant.
double order_free_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

}  // namespace

ActorNet ActorNet::make(std::mt19937_64& rng, int hidden, int features) {
  ActorNet net;
  net.extractor = DenseSpec({feature::kCount, hidden, features},
                            {Activation::kTanh, Activation::kTanh});
  net.params = Vector::Zero(net.num_params());
  net.extractor.initialize(net.params.head(net.extractor.num_params()), rng);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int k = 0; k < features; ++k) {
    net.params(net.t_offset() + k) = u(rng);
    net.params(net.o_offset() + k) = u(rng);
  }
  return net;
}

nlohmann::json ActorNet::to_json() const {
  return {{"extractor", extractor.to_json()}, {"params", vector_to_json(params)}};
}

ActorNet ActorNet::from_json(const nlohmann::json& j) {
  ActorNet net;
  net.extractor = DenseSpec::from_json(j.at("extractor"));
  if (net.extractor.input_size() != feature::kCount) {
    throw std::invalid_argument("actor extractor must take " + std::to_string(feature::kCount) +
                                " features");
  }
  net.params = vector_from_json(j.at("params"));
  if (net.params.size() != net.num_params()) {
    throw std::invalid_argument("actor parameter count mismatch");
  }
  if (!net.params.allFinite()) throw std::invalid_argument("actor parameters not finite");
  return net;
}

ActorPass actor_forward(const ActorNet& net, const Matrix& rows,
                        const std::vector<char>& target_allowed) {
  const int m = static_cast<int>(rows.rows());
  if (m < 1) throw std::invalid_argument("actor needs at least one target row");
  if (static_cast<int>(target_allowed.size()) != m) {
    throw std::invalid_argument("allowed mask size mismatch");
  }
  const int f = net.feature_width();
  ActorPass pass;
  pass.features = net.extractor.forward(net.params.head(net.extractor.num_params()), rows,
                                        &pass.cache);
  const Eigen::Map<const Vector> t_w(net.params.data() + net.t_offset(), f);
  const double t_b = net.params(net.t_offset() + f);
  const Eigen::Map<const Vector> o_w(net.params.data() + net.o_offset(), f);

  const Vector t = pass.features * t_w;
  const Vector o = pass.features * o_w;
  pass.scores.resize(m + 1);
  if (m == 1) {
    pass.scores(0) = t(0) + t_b;
  } else {
    const double total = order_free_sum(std::vector<double>(o.data(), o.data() + m));
    for (int i = 0; i < m; ++i) pass.scores(i) = t(i) + t_b + (total - o(i)) / (m - 1);
  }
  pass.scores(m) = net.params(net.stop_offset());

  pass.allowed.assign(target_allowed.begin(), target_allowed.end());
  pass.allowed.push_back(1);
  pass.forced_stop = std::none_of(target_allowed.begin(), target_allowed.end(),
                                  [](char a) { return a != 0; });
  pass.probs = Vector::Zero(m + 1);
  if (pass.forced_stop) {
    pass.probs(m) = 1.0;
    return pass;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= m; ++k) {
    if (pass.allowed[k]) top = std::max(top, pass.scores(k));
  }
  std::vector<double> e;
  e.reserve(m + 1);
  for (int k = 0; k <= m; ++k) {
    if (!pass.allowed[k]) continue;
    pass.probs(k) = std::exp(pass.scores(k) - top);
    e.push_back(pass.probs(k));
  }
  pass.probs /= order_free_sum(std::move(e));
  return pass;
}

void actor_backward(const ActorNet& net, const ActorPass& pass, const Vector& d_scores,
                    ParamSpan grad) {
  const int m = static_cast<int>(pass.features.rows());
  const int f = net.feature_width();
  if (d_scores.size() != m + 1) throw std::invalid_argument("score gradient size mismatch");
  if (grad.size() != net.num_params()) throw std::invalid_argument("gradient size mismatch");

  const Vector d_t = d_scores.head(m);
  Vector d_o = Vector::Zero(m);
  if (m > 1) d_o = (Vector::Constant(m, d_t.sum()) - d_t) / (m - 1);

  grad.segment(net.t_offset(), f) += pass.features.transpose() * d_t;
  grad(net.t_offset() + f) += d_t.sum();
  grad.segment(net.o_offset(), f) += pass.features.transpose() * d_o;
  grad(net.stop_offset()) += d_scores(m);

  const Eigen::Map<const Vector> t_w(net.params.data() + net.t_offset(), f);
  const Eigen::Map<const Vector> o_w(net.params.data() + net.o_offset(), f);
  const Matrix d_features = d_t * t_w.transpose() + d_o * o_w.transpose();
  net.extractor.backward(net.params.head(net.extractor.num_params()), pass.cache, d_features,
                         grad.head(net.extractor.num_params()));
}

Vector log_prob_score_grad(const ActorPass& pass, int action) {
  const Eigen::Index size = pass.probs.size();
  if (action < 0 || action >= size || !pass.allowed[action]) {
    throw std::invalid_argument("action outside the allowed set");
  }
  Vector g = Vector::Zero(size);
  if (pass.forced_stop) return g;
  for (Eigen::Index k = 0; k < size; ++k) {
    if (pass.allowed[k]) g(k) = (k == action ? 1.0 : 0.0) - pass.probs(k);
  }
  return g;
}

double entropy(const ActorPass& pass) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < pass.probs.size(); ++k) {
    const double p = pass.probs(k);
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

Vector entropy_score_grad(const ActorPass& pass) {
  Vector g = Vector::Zero(pass.probs.size());
  if (pass.forced_stop) return g;
  const double h = entropy(pass);
  for (Eigen::Index k = 0; k < pass.probs.size(); ++k) {
    const double p = pass.probs(k);
    if (pass.allowed[k] && p > 0.0) g(k) = -p * (std::log(p) + h);
  }
  return g;
}

std::vector<char> selectable_targets(const std::vector<bool>& fov_mask,
                                     const std::vector<char>& selected,
                                     std::span<const double> costs, double remaining) {
  const std::size_t m = fov_mask.size();
  if (selected.size() != m || costs.size() != m) {
    throw std::invalid_argument("selectable_targets size mismatch");
  }
  std::vector<char> out(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    out[j] = fov_mask[j] && !selected[j] && costs[j] <= remaining + 1e-12;
  }
  return out;
}

Allocation run_sequence(const ActorNet& net, const Observation& obs, const Radar& radar,
                        std::span<const double> costs, const ActionChooser& choose,
                        const MicroStepHook& on_step) {
  const int m = obs.num_targets();
  Allocation alloc;
  alloc.radar_id = radar.id;
  Matrix rows = obs.rows;
  std::vector<char> selected(m, 0);
  double committed = 0.0;
  while (true) {
    const double remaining = radar.budget - committed;
    const double share = radar.budget > 0.0 ? committed / radar.budget : 1.0;
    rows.col(feature::kBudgetLeft).setConstant(radar.budget > 0.0 ? 1.0 - share : 0.0);
    rows.col(feature::kBudgetCommitted).setConstant(share);
    const ActorPass pass =
        actor_forward(net, rows, selectable_targets(obs.fov_mask, selected, costs, remaining));
    const int action = pass.forced_stop ? m : choose(pass);
    if (action < 0 || action > m || !pass.allowed[action]) {
      throw std::logic_error("chooser returned a disallowed action");
    }
    if (on_step) on_step(rows, pass, action);
    if (action == m) break;
    selected[action] = 1;
    committed += costs[action];
    alloc.targets.push_back(action);
  }
  alloc.total_cost = committed;
  return alloc;
}

int argmax_action(const ActorPass& pass) {
  int best = static_cast<int>(pass.probs.size()) - 1;
  for (int k = 0; k < static_cast<int>(pass.probs.size()); ++k) {
    if (pass.allowed[k] && pass.probs(k) > pass.probs(best)) best = k;
  }
  return best;
}

int sample_action(const ActorPass& pass, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  double acc = 0.0;
  int last = static_cast<int>(pass.probs.size()) - 1;
  for (int k = 0; k < static_cast<int>(pass.probs.size()); ++k) {
    if (!pass.allowed[k] || pass.probs(k) <= 0.0) continue;
    acc += pass.probs(k);
    last = k;
    if (x < acc) return k;
  }
  return last;
}

Allocation ActorPolicy::decide(const Observation& obs, const Radar& radar,
                               std::span<const double> costs) {
  if (mode_ == Mode::kArgmax) return run_sequence(net_, obs, radar, costs, argmax_action);
  return run_sequence(net_, obs, radar, costs,
                      [this](const ActorPass& pass) { return sample_action(pass, rng_); });
}

}  // namespace radarnet::nn

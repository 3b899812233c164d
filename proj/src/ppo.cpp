#include "radarnet/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "radarnet/json_io.hpp"
#include "radarnet/parallel.hpp"
#include "radarnet/world.hpp"

namespace radarnet::nn {
namespace {

using nlohmann::json;

constexpr int kCheckpointSchemaVersion = 1;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream, 0x85ebca6bu};
  return std::mt19937_64(seq);
}

// Drives one radar's micro-steps inside World::step and records them.
class SamplingAgent final : public AllocationPolicy {
 public:
  SamplingAgent(const World& world, const ActorNet& actor, const CriticNet& critic,
                std::vector<Sample>& out, std::mt19937_64& rng, int horizon)
      : world_(world), actor_(actor), critic_(critic), out_(out), rng_(rng), horizon_(horizon) {}

  void begin_step() { done_ = 0; }

  Allocation decide(const Observation& obs, const Radar& radar,
                    std::span<const double> costs) override {
    const std::vector<Vector> pooled = pool_all(obs);
    const double step_fraction = static_cast<double>(world_.step_index()) / horizon_;
    const double done_fraction = static_cast<double>(done_) / world_.num_radars();
    auto chooser = [this](const ActorPass& pass) { return sample_action(pass, rng_); };
    auto hook = [&](const Matrix& rows, const ActorPass& pass, int action) {
      Sample s;
      s.rows = rows;
      s.target_allowed.assign(pass.allowed.begin(), pass.allowed.end() - 1);
      s.action = action;
      s.forced = pass.forced_stop;
      s.log_prob = std::log(pass.probs(action));
      s.summary = make_summary(pooled, step_fraction, done_fraction,
                               rows(0, feature::kBudgetCommitted));
      s.value = critic_.forward(s.summary);
      out_.push_back(std::move(s));
    };
    Allocation alloc = run_sequence(actor_, obs, radar, costs, chooser, hook);
    ++done_;
    return alloc;
  }

  // Pooled extractor features of every radar's current view.
  std::vector<Vector> pool_all(const Observation& own) const {
    std::vector<Vector> pooled;
    for (int i = 0; i < world_.num_radars(); ++i) {
      pooled.push_back(i == own.radar_id ? pooled_features(actor_, own.rows)
                                         : pooled_features(actor_, world_.observe(i).rows));
    }
    return pooled;
  }

  std::string name() const override { return "rl-sampling"; }

 private:
  const World& world_;
  const ActorNet& actor_;
  const CriticNet& critic_;
  std::vector<Sample>& out_;
  std::mt19937_64& rng_;
  int horizon_;
  int done_ = 0;
};

struct EpisodeResult {
  std::vector<Sample> samples;
  double mean_utility = 0.0;
};

EpisodeResult run_episode_sampled(std::shared_ptr<const Scenario> scenario, const ActorNet& actor,
                                  const CriticNet& critic, int steps, std::uint64_t world_seed,
                                  double gamma, double lambda, DiscountScope scope) {
  World world(scenario, world_seed);
  const int horizon = steps > 0 ? steps : scenario->episode_length;
  std::mt19937_64 rng = make_rng(world_seed, 7);
  EpisodeResult res;
  SamplingAgent agent(world, actor, critic, res.samples, rng, horizon);
  double total = 0.0;
  for (int k = 0; k < horizon; ++k) {
    agent.begin_step();
    const std::size_t before = res.samples.size();
    const double u = world.step(agent).utility;
    if (res.samples.size() == before) throw std::logic_error("macro-step produced no micro-steps");
    res.samples.back().reward = u;
    res.samples.back().macro_end = true;
    total += u;
  }
  res.samples.back().terminal = true;
  compute_gae(res.samples, gamma, lambda, scope);

  Sample pad;
  pad.padding = true;
  pad.forced = true;
  Observation any;
  any.radar_id = -1;
  const std::vector<Vector> pooled = agent.pool_all(any);
  pad.summary = make_summary(pooled, 1.0, 0.0, 0.0);
  pad.value = critic.forward(pad.summary);
  res.samples.push_back(std::move(pad));
  res.mean_utility = total / horizon;
  return res;
}

double global_norm(const Vector& g) { return g.norm(); }

void clip_norm(Vector& g, double max_norm) {
  const double n = global_norm(g);
  if (max_norm > 0.0 && n > max_norm) g *= max_norm / n;
}

}  // namespace

void PpoConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* why) {
    if (!ok) throw ConfigError(field, why);
  };
  require(iterations >= 0, "iterations", "must be >= 0");
  require(episodes >= 1, "episodes", "must be >= 1");
  require(gamma > 0.0 && gamma <= 1.0, "gamma", "must lie in (0, 1]");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda", "must lie in [0, 1]");
  require(clip > 0.0, "clip", "must be > 0");
  require(epochs >= 1, "epochs", "must be >= 1");
  require(minibatch >= 1, "minibatch", "must be >= 1");
  require(lr > 0.0, "lr", "must be > 0");
  require(entropy_coef >= 0.0, "entropy_coef", "must be >= 0");
  require(value_coef > 0.0, "value_coef", "must be > 0");
  require(max_grad_norm >= 0.0, "max_grad_norm", "must be >= 0 (0 disables)");
  require(hidden >= 1 && features >= 1 && critic_hidden >= 1, "hidden", "layer widths must be >= 1");
}

json PpoConfig::to_json() const {
  return {{"iterations", iterations},     {"episodes", episodes},
          {"steps", steps},               {"gamma", gamma},
          {"lambda", lambda},             {"discount_scope", discount_scope_name(discount_scope)},
          {"clip", clip},
          {"epochs", epochs},             {"minibatch", minibatch},
          {"lr", lr},                     {"entropy_coef", entropy_coef},
          {"value_coef", value_coef},     {"max_grad_norm", max_grad_norm},
          {"seed", seed},                 {"hidden", hidden},
          {"features", features},         {"critic_hidden", critic_hidden}};
}

PpoConfig PpoConfig::from_json(const json& j) {
  PpoConfig c;
  c.iterations = j.at("iterations").get<int>();
  c.episodes = j.at("episodes").get<int>();
  c.steps = j.at("steps").get<int>();
  c.gamma = j.at("gamma").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.discount_scope = parse_discount_scope(j.at("discount_scope").get<std::string>());
  c.clip = j.at("clip").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.minibatch = j.at("minibatch").get<int>();
  c.lr = j.at("lr").get<double>();
  c.entropy_coef = j.at("entropy_coef").get<double>();
  c.value_coef = j.at("value_coef").get<double>();
  c.max_grad_norm = j.at("max_grad_norm").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.hidden = j.at("hidden").get<int>();
  c.features = j.at("features").get<int>();
  c.critic_hidden = j.at("critic_hidden").get<int>();
  return c;
}

std::string discount_scope_name(DiscountScope s) {
  return s == DiscountScope::kMacroStep ? "macro" : "micro";
}

DiscountScope parse_discount_scope(const std::string& name) {
  if (name == "macro") return DiscountScope::kMacroStep;
  if (name == "micro") return DiscountScope::kMicroStep;
  throw ConfigError("discount_scope", "expected macro or micro, got '" + name + "'");
}

void compute_gae(std::span<Sample> episode, double gamma, double lambda, DiscountScope scope) {
  double next_value = 0.0;
  double next_adv = 0.0;
  for (std::size_t t = episode.size(); t-- > 0;) {
    Sample& s = episode[t];
    if (s.padding) continue;
    if (s.terminal) {
      next_value = 0.0;
      next_adv = 0.0;
    }
    const bool discounts = scope == DiscountScope::kMicroStep || s.macro_end;
    const double g = discounts ? gamma : 1.0;
    const double l = discounts ? lambda : 1.0;
    const double delta = s.reward + g * next_value - s.value;
    s.advantage = delta + g * l * next_adv;
    s.ret = s.advantage + s.value;
    next_value = s.value;
    next_adv = s.advantage;
  }
}

RolloutBatch rollout(std::shared_ptr<const Scenario> scenario, const ActorNet& actor,
                     const CriticNet& critic, int episodes, int steps, std::uint64_t seed,
                     double gamma, double lambda, int threads, DiscountScope scope) {
  if (!scenario) throw std::invalid_argument("rollout needs a scenario");
  if (episodes < 1) throw std::invalid_argument("rollout needs at least one episode");
  std::vector<EpisodeResult> results(episodes);
  parallel_for(episodes, threads > 0 ? threads : default_thread_count(), [&](int e) {
    results[e] =
        run_episode_sampled(scenario, actor, critic, steps, seed + e, gamma, lambda, scope);
  });
  RolloutBatch batch;
  for (EpisodeResult& r : results) {
    batch.episode_utility.push_back(r.mean_utility);
    std::move(r.samples.begin(), r.samples.end(), std::back_inserter(batch.samples));
  }
  return batch;
}

LossParts minibatch_loss(const ActorNet& actor, const CriticNet& critic,
                         std::span<const Sample* const> batch, const PpoConfig& config,
                         Vector* actor_grad, Vector* critic_grad) {
  LossParts out;
  if (batch.empty()) return out;

  std::vector<const Sample*> policy;
  for (const Sample* s : batch) {
    if (s->trains_policy()) policy.push_back(s);
  }
  if (!policy.empty()) {
    double mean = 0.0;
    for (const Sample* s : policy) mean += s->advantage;
    mean /= static_cast<double>(policy.size());
    double var = 0.0;
    for (const Sample* s : policy) var += (s->advantage - mean) * (s->advantage - mean);
    const double sd = std::sqrt(var / static_cast<double>(policy.size()));
    const double inv_p = 1.0 / static_cast<double>(policy.size());
    for (const Sample* s : policy) {
      const double adv = (s->advantage - mean) / (sd + 1e-8);
      const ActorPass pass = actor_forward(actor, s->rows, s->target_allowed);
      const double logp = std::log(pass.probs(s->action));
      const double ratio = std::exp(logp - s->log_prob);
      const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip);
      const double surr1 = ratio * adv;
      const double surr2 = clipped * adv;
      const double h = entropy(pass);
      out.policy -= std::min(surr1, surr2) * inv_p;
      out.entropy += h * inv_p;
      out.approx_kl += (s->log_prob - logp) * inv_p;
      if (std::abs(ratio - 1.0) > config.clip) out.clip_fraction += inv_p;
      if (actor_grad) {
        Vector d = -config.entropy_coef * inv_p * entropy_score_grad(pass);
        // The min picks the clipped branch only when it is strictly smaller;
        // that branch is flat in the parameters.
        if (surr1 <= surr2) d += (-inv_p * adv * ratio) * log_prob_score_grad(pass, s->action);
        actor_backward(actor, pass, d, *actor_grad);
      }
    }
  }

  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  Matrix summaries(b, critic.spec.input_size());
  Vector returns(b);
  for (Eigen::Index k = 0; k < b; ++k) {
    summaries.row(k) = batch[k]->summary.transpose();
    returns(k) = batch[k]->padding ? 0.0 : batch[k]->ret;
  }
  DenseSpec::Cache cache;
  const Vector values = critic.forward(summaries, critic_grad ? &cache : nullptr);
  const Vector err = values - returns;
  out.value = err.squaredNorm() / static_cast<double>(b);
  if (critic_grad) {
    critic.backward(cache, (config.value_coef * 2.0 / static_cast<double>(b)) * err, *critic_grad);
  }
  out.total = out.policy - config.entropy_coef * out.entropy + config.value_coef * out.value;
  return out;
}

UpdateReport ppo_update(ActorNet& actor, CriticNet& critic, Adam& actor_opt, Adam& critic_opt,
                        const RolloutBatch& batch, const PpoConfig& config, std::uint64_t seed) {
  if (batch.samples.empty()) throw std::invalid_argument("ppo_update needs a nonempty batch");
  const ActorNet actor0 = actor;
  const CriticNet critic0 = critic;
  const Adam actor_opt0 = actor_opt;
  const Adam critic_opt0 = critic_opt;

  UpdateReport report;
  std::mt19937_64 rng = make_rng(seed, 11);
  std::vector<const Sample*> order;
  order.reserve(batch.samples.size());
  for (const Sample& s : batch.samples) order.push_back(&s);
  int count = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.minibatch) {
      const std::size_t len = std::min<std::size_t>(config.minibatch, order.size() - start);
      const std::span<const Sample* const> mb(order.data() + start, len);
      Vector ga = Vector::Zero(actor.params.size());
      Vector gc = Vector::Zero(critic.params.size());
      const LossParts loss = minibatch_loss(actor, critic, mb, config, &ga, &gc);
      if (!std::isfinite(loss.total) || !ga.allFinite() || !gc.allFinite()) {
        actor = actor0;
        critic = critic0;
        actor_opt = actor_opt0;
        critic_opt = critic_opt0;
        std::ostringstream msg;
        msg << "non-finite loss in epoch " << epoch << " at minibatch offset " << start
            << " (policy " << loss.policy << ", value " << loss.value << ", entropy "
            << loss.entropy << "); update aborted, parameters restored";
        report.aborted = true;
        report.diagnostic = msg.str();
        return report;
      }
      clip_norm(ga, config.max_grad_norm);
      clip_norm(gc, config.max_grad_norm);
      actor_opt.step(actor.params, ga);
      critic_opt.step(critic.params, gc);
      report.loss.policy += loss.policy;
      report.loss.value += loss.value;
      report.loss.entropy += loss.entropy;
      report.loss.total += loss.total;
      report.loss.approx_kl += loss.approx_kl;
      report.loss.clip_fraction += loss.clip_fraction;
      ++count;
    }
  }
  const double inv = 1.0 / count;
  report.loss.policy *= inv;
  report.loss.value *= inv;
  report.loss.entropy *= inv;
  report.loss.total *= inv;
  report.loss.approx_kl *= inv;
  report.loss.clip_fraction *= inv;
  return report;
}

PpoState PpoState::initial(const PpoConfig& config, const Scenario& scenario) {
  config.validate();
  PpoState st;
  st.config = config;
  st.scenario_hash = scenario.hash();
  std::mt19937_64 rng = make_rng(config.seed, 1);
  st.actor = ActorNet::make(rng, config.hidden, config.features);
  st.critic = CriticNet::make(summary_size(scenario.num_radars(), config.features), rng,
                              config.critic_hidden);
  st.actor_opt.lr = config.lr;
  st.critic_opt.lr = config.lr;
  return st;
}

json PpoState::to_json() const {
  json hist = json::array();
  for (const IterationRecord& r : history) {
    hist.push_back({{"iteration", r.iteration},
                    {"mean_utility", r.mean_utility},
                    {"policy_loss", r.policy_loss},
                    {"value_loss", r.value_loss},
                    {"entropy", r.entropy},
                    {"approx_kl", r.approx_kl},
                    {"clip_fraction", r.clip_fraction},
                    {"samples", r.samples},
                    {"aborted", r.aborted}});
  }
  return {{"schema_version", kCheckpointSchemaVersion},
          {"kind", "ppo"},
          {"config", config.to_json()},
          {"scenario_hash", scenario_hash},
          {"actor", actor.to_json()},
          {"critic", critic.to_json()},
          {"actor_opt", actor_opt.to_json()},
          {"critic_opt", critic_opt.to_json()},
          {"iteration", iteration},
          {"history", hist},
          {"events", events}};
}

PpoState PpoState::from_json(const json& j) {
  if (j.value("schema_version", 0) != kCheckpointSchemaVersion || j.value("kind", "") != "ppo") {
    throw ConfigError("checkpoint.schema_version", "not a supported PPO checkpoint");
  }
  PpoState st;
  try {
    st.config = PpoConfig::from_json(j.at("config"));
    st.scenario_hash = j.at("scenario_hash").get<std::string>();
    st.actor = ActorNet::from_json(j.at("actor"));
    st.critic = CriticNet::from_json(j.at("critic"));
    st.actor_opt = Adam::from_json(j.at("actor_opt"));
    st.critic_opt = Adam::from_json(j.at("critic_opt"));
    st.iteration = j.at("iteration").get<int>();
    for (const json& r : j.at("history")) {
      IterationRecord rec;
      rec.iteration = r.at("iteration").get<int>();
      rec.mean_utility = r.at("mean_utility").get<double>();
      rec.policy_loss = r.at("policy_loss").get<double>();
      rec.value_loss = r.at("value_loss").get<double>();
      rec.entropy = r.at("entropy").get<double>();
      rec.approx_kl = r.at("approx_kl").get<double>();
      rec.clip_fraction = r.at("clip_fraction").get<double>();
      rec.samples = r.at("samples").get<std::size_t>();
      rec.aborted = r.at("aborted").get<bool>();
      st.history.push_back(rec);
    }
    st.events = j.at("events").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint", e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("checkpoint", e.what());
  }
  return st;
}

void save_checkpoint(const PpoState& state, const std::string& path) {
  write_json_atomically(state.to_json(), path);
}

PpoState load_checkpoint(const std::string& path) {
  return PpoState::from_json(read_json_file(path, "checkpoint"));
}

PpoState train(const PpoConfig& config, std::shared_ptr<const Scenario> scenario,
               const std::string& checkpoint_path, const IterationCallback& on_iteration) {
  if (!scenario) throw std::invalid_argument("train needs a scenario");
  config.validate();
  PpoState st = PpoState::initial(config, *scenario);
  if (!checkpoint_path.empty() && std::filesystem::exists(checkpoint_path)) {
    PpoState saved = load_checkpoint(checkpoint_path);
    // Only the iteration budget may change between runs.
    json a = saved.config.to_json();
    json b = config.to_json();
    a.erase("iterations");
    b.erase("iterations");
    if (a != b || saved.scenario_hash != st.scenario_hash) {
      throw ConfigError("checkpoint", "checkpoint " + checkpoint_path +
                                          " was written for a different configuration");
    }
    saved.config = config;
    st = std::move(saved);
  }
  const int threads = config.threads > 0 ? config.threads : default_thread_count();
  while (st.iteration < config.iterations) {
    const int it = st.iteration;
    // Training worlds never reuse the small evaluation seeds.
    const std::uint64_t base =
        1'000'000'000ULL * config.seed + static_cast<std::uint64_t>(it) * config.episodes;
    const RolloutBatch batch = rollout(scenario, st.actor, st.critic, config.episodes,
                                       config.steps, base, config.gamma, config.lambda, threads,
                                       config.discount_scope);
    const UpdateReport rep = ppo_update(st.actor, st.critic, st.actor_opt, st.critic_opt, batch,
                                        config, base ^ 0x5bd1e995ULL);
    IterationRecord rec;
    rec.iteration = it;
    rec.mean_utility = std::accumulate(batch.episode_utility.begin(), batch.episode_utility.end(),
                                       0.0) /
                       static_cast<double>(batch.episode_utility.size());
    rec.policy_loss = rep.loss.policy;
    rec.value_loss = rep.loss.value;
    rec.entropy = rep.loss.entropy;
    rec.approx_kl = rep.loss.approx_kl;
    rec.clip_fraction = rep.loss.clip_fraction;
    rec.samples = batch.samples.size();
    rec.aborted = rep.aborted;
    if (rep.aborted) st.events.push_back("iteration " + std::to_string(it) + ": " + rep.diagnostic);
    st.history.push_back(rec);
    ++st.iteration;
    if (!checkpoint_path.empty()) save_checkpoint(st, checkpoint_path);
    if (on_iteration) on_iteration(rec);
  }
  return st;
}

}  // namespace radarnet::nn

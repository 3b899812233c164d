#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "radarnet/ppo.hpp"
#include "radarnet/scenario.hpp"

namespace radarnet::nn {
namespace {

std::shared_ptr<const Scenario> training_scenario() {
  return std::make_shared<const Scenario>(
      load_scenario_file(std::string(RADARNET_SCENARIO_DIR) + "/training.json"));
}

PpoConfig small_config() {
  PpoConfig c;
  c.iterations = 2;
  c.episodes = 2;
  c.steps = 12;
  c.minibatch = 64;
  c.epochs = 2;
  c.threads = 1;
  return c;
}

TEST(Gae, HandComputedEpisode) {
  std::vector<Sample> ep(3);
  ep[0].value = 0.5;
  ep[1].value = 0.25;
  ep[2].value = 1.0;
  ep[2].reward = 2.0;
  ep[2].terminal = true;
  compute_gae(ep, 0.9, 0.5, DiscountScope::kMicroStep);
  const double d2 = 2.0 - 1.0;
  const double d1 = 0.9 * 1.0 - 0.25;
  const double d0 = 0.9 * 0.25 - 0.5;
  EXPECT_DOUBLE_EQ(ep[2].advantage, d2);
  EXPECT_DOUBLE_EQ(ep[1].advantage, d1 + 0.45 * d2);
  EXPECT_DOUBLE_EQ(ep[0].advantage, d0 + 0.45 * (d1 + 0.45 * d2));
  for (const Sample& s : ep) EXPECT_DOUBLE_EQ(s.ret, s.advantage + s.value);
}

TEST(Gae, MacroScopeDiscountsOnlyAcrossMacroSteps) {
  std::vector<Sample> ep(3);
  ep[0].value = 0.5;
  ep[0].reward = 1.0;
  ep[0].macro_end = true;
  ep[1].value = 0.25;
  ep[2].value = 1.0;
  ep[2].reward = 2.0;
  ep[2].macro_end = true;
  ep[2].terminal = true;
  compute_gae(ep, 0.9, 0.5, DiscountScope::kMacroStep);
  EXPECT_DOUBLE_EQ(ep[2].advantage, 1.0);
  EXPECT_DOUBLE_EQ(ep[1].advantage, (1.0 - 0.25) + 1.0);
  EXPECT_DOUBLE_EQ(ep[0].advantage, (1.0 + 0.9 * 0.25 - 0.5) + 0.45 * 1.75);
  EXPECT_EQ(parse_discount_scope(discount_scope_name(DiscountScope::kMicroStep)),
            DiscountScope::kMicroStep);
  EXPECT_THROW(parse_discount_scope("step"), ConfigError);
}

TEST(Rollout, RewardsOnlyOnMacroStepCompletion) {
  const auto sc = training_scenario();
  const PpoState st = PpoState::initial(small_config(), *sc);
  const RolloutBatch b = rollout(sc, st.actor, st.critic, 1, 10, 77, 0.99, 0.95, 1);
  int rewarded = 0;
  int padding = 0;
  for (std::size_t k = 0; k < b.samples.size(); ++k) {
    const Sample& s = b.samples[k];
    if (s.padding) {
      ++padding;
      continue;
    }
    if (s.reward != 0.0) {
      ++rewarded;
      EXPECT_EQ(s.action, s.rows.rows()) << "reward must sit on a stop action";
      EXPECT_TRUE(s.macro_end);
    }
    EXPECT_TRUE(std::isfinite(s.advantage));
    EXPECT_EQ(s.summary.size(), summary_size(sc->num_radars(), 6));
  }
  EXPECT_EQ(rewarded, 10);
  EXPECT_EQ(padding, 1);
  EXPECT_TRUE(b.samples[b.samples.size() - 2].terminal);
}

TEST(Rollout, SameSeedSameBatch) {
  const auto sc = training_scenario();
  const PpoState st = PpoState::initial(small_config(), *sc);
  const RolloutBatch a = rollout(sc, st.actor, st.critic, 2, 6, 5, 0.99, 0.95, 1);
  const RolloutBatch b = rollout(sc, st.actor, st.critic, 2, 6, 5, 0.99, 0.95, 2);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    EXPECT_EQ(a.samples[k].action, b.samples[k].action);
    EXPECT_EQ(a.samples[k].advantage, b.samples[k].advantage);
  }
  EXPECT_EQ(a.episode_utility, b.episode_utility);
}

TEST(Rollout, SampledSequencesAreLegal) {
  const auto sc = training_scenario();
  const PpoState st = PpoState::initial(small_config(), *sc);
  const RolloutBatch b = rollout(sc, st.actor, st.critic, 1, 20, 3, 0.99, 0.95, 1);
  for (const Sample& s : b.samples) {
    if (s.padding) continue;
    const int m = static_cast<int>(s.rows.rows());
    ASSERT_TRUE(s.action == m || s.target_allowed[s.action]);
    EXPECT_GE(s.rows(0, feature::kBudgetLeft), -1e-12);
  }
}

TEST(PpoLoss, FullLossGradientMatchesFiniteDifferences) {
  const auto sc = training_scenario();
  PpoConfig cfg = small_config();
  cfg.critic_hidden = 12;  // keeps the finite-difference sweep under 10^3 parameters
  PpoState st = PpoState::initial(cfg, *sc);
  ASSERT_LE(st.critic.params.size(), 1000);
  RolloutBatch b = rollout(sc, st.actor, st.critic, 1, 3, 11, 0.99, 0.95, 1);
  // Perturb old log-probs so some ratios sit inside and some outside the clip band.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (Sample& s : b.samples) s.log_prob += u(rng);
  std::vector<const Sample*> ptrs;
  for (const Sample& s : b.samples) ptrs.push_back(&s);

  auto actor_loss = [&](const Vector& p) {
    ActorNet a = st.actor;
    a.params = p;
    return minibatch_loss(a, st.critic, ptrs, cfg, nullptr, nullptr).total;
  };
  auto actor_grad = [&](const Vector& p) {
    ActorNet a = st.actor;
    a.params = p;
    Vector ga = Vector::Zero(p.size());
    Vector gc = Vector::Zero(st.critic.params.size());
    minibatch_loss(a, st.critic, ptrs, cfg, &ga, &gc);
    return ga;
  };
  EXPECT_LT(grad_check(actor_loss, actor_grad, st.actor.params), 1e-4);

  auto critic_loss = [&](const Vector& p) {
    CriticNet c = st.critic;
    c.params = p;
    return minibatch_loss(st.actor, c, ptrs, cfg, nullptr, nullptr).total;
  };
  auto critic_grad = [&](const Vector& p) {
    CriticNet c = st.critic;
    c.params = p;
    Vector ga = Vector::Zero(st.actor.params.size());
    Vector gc = Vector::Zero(p.size());
    minibatch_loss(st.actor, c, ptrs, cfg, &ga, &gc);
    return gc;
  };
  EXPECT_LT(grad_check(critic_loss, critic_grad, st.critic.params), 1e-4);
}

TEST(PpoLoss, ClippedRatiosGiveNoPolicyGradient) {
  const auto sc = training_scenario();
  PpoConfig cfg = small_config();
  cfg.entropy_coef = 0.0;
  PpoState st = PpoState::initial(cfg, *sc);
  RolloutBatch b = rollout(sc, st.actor, st.critic, 1, 3, 12, 0.99, 0.95, 1);
  // Ratio e^{1} > 1.2 with positive advantage, e^{-1} < 0.8 with negative.
  std::vector<const Sample*> ptrs;
  for (Sample& s : b.samples) {
    if (!s.trains_policy()) continue;
    const bool up = ptrs.size() % 2 == 0;
    s.log_prob -= up ? 1.0 : -1.0;
    s.advantage = up ? 1.0 : -1.0;
    ptrs.push_back(&s);
  }
  ASSERT_GE(ptrs.size(), 2u);
  Vector ga = Vector::Zero(st.actor.params.size());
  Vector gc = Vector::Zero(st.critic.params.size());
  const LossParts l = minibatch_loss(st.actor, st.critic, ptrs, cfg, &ga, &gc);
  EXPECT_EQ(ga.norm(), 0.0);
  EXPECT_DOUBLE_EQ(l.clip_fraction, 1.0);
}

TEST(PpoLoss, ZeroAdvantageLeavesOnlyEntropyGradient) {
  const auto sc = training_scenario();
  PpoConfig cfg = small_config();
  cfg.entropy_coef = 0.0;
  PpoState st = PpoState::initial(cfg, *sc);
  RolloutBatch b = rollout(sc, st.actor, st.critic, 1, 3, 13, 0.99, 0.95, 1);
  std::vector<const Sample*> ptrs;
  for (Sample& s : b.samples) {
    s.advantage = 0.0;
    ptrs.push_back(&s);
  }
  Vector ga = Vector::Zero(st.actor.params.size());
  Vector gc = Vector::Zero(st.critic.params.size());
  minibatch_loss(st.actor, st.critic, ptrs, cfg, &ga, &gc);
  EXPECT_EQ(ga.norm(), 0.0);
}

TEST(PpoUpdate, NonFiniteLossRestoresParameters) {
  const auto sc = training_scenario();
  PpoConfig cfg = small_config();
  PpoState st = PpoState::initial(cfg, *sc);
  RolloutBatch b = rollout(sc, st.actor, st.critic, 1, 3, 14, 0.99, 0.95, 1);
  b.samples.front().ret = std::numeric_limits<double>::quiet_NaN();
  const Vector a0 = st.actor.params;
  const Vector c0 = st.critic.params;
  const UpdateReport rep = ppo_update(st.actor, st.critic, st.actor_opt, st.critic_opt, b, cfg, 1);
  EXPECT_TRUE(rep.aborted);
  EXPECT_FALSE(rep.diagnostic.empty());
  EXPECT_EQ(st.actor.params, a0);
  EXPECT_EQ(st.critic.params, c0);
  EXPECT_EQ(st.actor_opt.step_count, 0);
}

TEST(Train, CheckpointResumeMatchesStraightRun) {
  const auto sc = training_scenario();
  const std::string path =
      (std::filesystem::temp_directory_path() / "radarnet_ppo_resume_test.json").string();
  std::filesystem::remove(path);
  PpoConfig cfg = small_config();
  const PpoState straight = train(cfg, sc);

  PpoConfig first = cfg;
  first.iterations = 1;
  train(first, sc, path);
  const PpoState resumed = train(cfg, sc, path);
  EXPECT_EQ(resumed.iteration, 2);
  EXPECT_EQ(resumed.actor.params, straight.actor.params);
  EXPECT_EQ(resumed.critic.params, straight.critic.params);
  ASSERT_EQ(resumed.history.size(), 2u);
  EXPECT_EQ(resumed.history[1].mean_utility, straight.history[1].mean_utility);

  PpoConfig other = cfg;
  other.lr = 1e-3;
  EXPECT_THROW(train(other, sc, path), ConfigError);
  std::filesystem::remove(path);
}

TEST(Config, Validation) {
  PpoConfig c;
  c.clip = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PpoConfig{};
  c.episodes = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(PpoConfig{}.validate());
  const PpoConfig back = PpoConfig::from_json(PpoConfig{}.to_json());
  EXPECT_EQ(back.to_json(), PpoConfig{}.to_json());
}

}  // namespace
}  // namespace radarnet::nn

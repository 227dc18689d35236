#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "tspo/error.hpp"
#include "tspo/trainer.hpp"

using namespace tspo;

namespace {

std::shared_ptr<const World> default_world(std::uint64_t seed = 0) {
  return std::make_shared<const World>(build_world(WorldConfig{}, seed));
}

TrainConfig short_config(std::size_t steps = 20) {
  TrainConfig c;
  c.steps = steps;
  return c;
}

// Success rate of a policy that picks uniformly among all actions.
double random_policy_success(const World& w, std::size_t episodes) {
  const auto shared = std::make_shared<const World>(w);
  const Environment env(shared);
  std::size_t hits = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    Rng rng(derive_seed(99, e));
    const std::size_t q = e % w.questions.size();
    const Trajectory t = env.run_episode(q, rng(), [&](const EnvState&) {
      return env.action_from_index(uniform_below(rng, env.num_actions()));
    });
    hits += exact_match(t.final_answer, GoldAnswer(w.questions[q].gold));
  }
  return static_cast<double>(hits) / static_cast<double>(episodes);
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.group_size = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.clip_epsilon = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.kl_beta = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig{};
  c.alpha = 1.5;
  try {
    c.validate();
    FAIL("expected rejection");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "alpha");
  }
}

TEST_CASE("steps=0 leaves parameters unchanged") {
  TrainConfig c = short_config(0);
  const TrainResult r = train(default_world(), c);
  CHECK(r.metrics.empty());
  CHECK(oracle::frobenius(r.params.weights) == 0.0);
}

TEST_CASE("deterministic given the seed") {
  const auto w = default_world();
  const TrainResult a = train(w, short_config());
  const TrainResult b = train(w, short_config());
  CHECK(a.metrics == b.metrics);
  CHECK(a.params == b.params);
  TrainConfig other = short_config();
  other.seed = 1;
  CHECK_FALSE(train(w, other).metrics == a.metrics);
}

TEST_CASE("serial and parallel steps are bitwise identical") {
  const auto w = default_world();
  for (std::size_t epochs : {1u, 3u}) {
    TrainConfig c = short_config(15);
    c.inner_epochs = epochs;
    c.threads = 4;
    const TrainResult s = train(w, c, ExecutionMode::Serial);
    const TrainResult p = train(w, c, ExecutionMode::Parallel);
    CHECK(s.metrics == p.metrics);
    CHECK(s.params == p.params);
  }
}

TEST_CASE("multi-epoch updates move away from the single-epoch path") {
  const auto w = default_world();
  TrainConfig c = short_config(5);
  const TrainResult one = train(w, c);
  c.inner_epochs = 3;
  const TrainResult three = train(w, c);
  CHECK_FALSE(one.params == three.params);
}

TEST_CASE("alpha=0 under all-wrong reproduces the none strategy exactly") {
  const auto w = default_world();
  TrainConfig a = short_config(30);
  a.alpha = 0.0;
  a.strategy = Strategy::AllWrongGroups;
  TrainConfig b = short_config(30);
  b.strategy = Strategy::NoneStrategy;
  Trainer ta(w, a), tb(w, b);
  for (int s = 0; s < 30; ++s) {
    CHECK(ta.step() == tb.step());
    CHECK(ta.params() == tb.params());
  }
}

TEST_CASE("all-wrong batches: none gives no surrogate gradient, all-wrong does") {
  WorldConfig wc;
  wc.answer_candidates = 40;
  wc.max_turns = 3;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 200 && checked < 3; ++seed) {
    const auto w = std::make_shared<const World>(build_world(wc, seed));
    TrainConfig c;
    c.batch_questions = 2;
    c.group_size = 4;
    c.seed = seed;
    c.strategy = Strategy::NoneStrategy;
    Trainer none(w, c);
    const StepMetrics mn = none.step();
    if (mn.frac_all_wrong != 1.0 || mn.n_omp == 0) continue;
    ++checked;
    CHECK(mn.surrogate_grad_norm == 0.0);
    c.strategy = Strategy::AllWrongGroups;
    c.alpha = 1.0;
    Trainer tspo_trainer(w, c);
    const StepMetrics mt = tspo_trainer.step();
    CHECK(mt.frac_all_wrong == 1.0);  // same rollouts
    CHECK(mt.surrogate_grad_norm > 0.0);
  }
  CHECK(checked == 3);
}

TEST_CASE("group observer sees every slot in order") {
  Trainer t(default_world(), short_config(2));
  std::vector<std::size_t> slots;
  t.set_group_observer([&](const GroupRecord& g) {
    slots.push_back(g.slot);
    CHECK(g.rollout.group_size() == t.config().group_size);
    CHECK(g.advantages.mask == g.rewards.mask);
  });
  t.step();
  REQUIRE(slots.size() == t.config().batch_questions);
  for (std::size_t i = 0; i < slots.size(); ++i) CHECK(slots[i] == i);
}

TEST_CASE("metrics are well formed") {
  const TrainResult r = train(default_world(), short_config(10));
  REQUIRE(r.metrics.size() == 10);
  for (std::size_t i = 0; i < r.metrics.size(); ++i) {
    const StepMetrics& m = r.metrics[i];
    CHECK(m.step == i);
    CHECK(std::abs(m.frac_all_correct + m.frac_mixed + m.frac_all_wrong - 1.0) < 1e-9);
    CHECK(m.n_opp + m.n_omp + m.n_omm + m.n_opm == 8 * 5);
    CHECK(m.kl >= 0.0);
    CHECK(m.mean_len >= 1.0);
  }
  CHECK(r.metrics[0].kl == 0.0);
}

TEST_CASE("training beats the random-policy baseline") {
  const auto w = default_world();
  const double baseline = random_policy_success(*w, 20000);
  const TrainResult r = train(w, TrainConfig{});
  double tail = 0;
  for (std::size_t i = r.metrics.size() - 10; i < r.metrics.size(); ++i) tail += r.metrics[i].mean_reward;
  tail /= 10;
  MESSAGE("random baseline " << baseline << ", trained " << tail);
  CHECK(tail > baseline);
}

TEST_CASE("early training has a large share of all-wrong groups") {
  const TrainResult r = train(default_world(), short_config(5));
  double mean = 0;
  for (const auto& m : r.metrics) mean += m.frac_all_wrong;
  mean /= 5;
  MESSAGE("initial all-wrong fraction " << mean);
  CHECK(mean > 0.2);
}

}  // TEST_SUITE

#include "tspo/objective.hpp"

#include <algorithm>
#include <cmath>

#include "tspo/error.hpp"

namespace tspo {

std::size_t RolloutGroup::max_turns() const {
  std::size_t k = 0;
  for (const auto& r : records) k = std::max(k, r.size());
  return k;
}

std::vector<std::vector<double>> RolloutGroup::visited_states() const {
  std::vector<std::vector<double>> out;
  for (const auto& traj : records) {
    for (const ActionRecord& r : traj) out.push_back(r.features);
  }
  return out;
}

RolloutGroup rollout_group(const PolicyParams& params, const Environment& env,
                           std::size_t question_id, std::size_t group_size, Rng& rng) {
  const Question& question = env.world().questions.at(question_id);
  RolloutGroup group;
  group.question_id = question_id;
  group.gold = GoldAnswer(question.gold);
  group.trajectories.reserve(group_size);
  group.records.reserve(group_size);

  for (std::size_t i = 0; i < group_size; ++i) {
    std::vector<ActionRecord> recs;
    const std::uint64_t episode_seed = rng();
    Trajectory traj = env.run_episode(question_id, episode_seed, [&](const EnvState& s) {
      ActionRecord rec;
      rec.features = env.features(s);
      const std::vector<double> logp = action_log_distribution(params, rec.features);
      std::vector<double> p(logp.size());
      std::transform(logp.begin(), logp.end(), p.begin(), [](double v) { return std::exp(v); });
      rec.action = sample_categorical(p, rng);
      rec.log_prob_old = logp[rec.action];
      const EnvAction action = env.action_from_index(rec.action);
      recs.push_back(std::move(rec));
      return action;
    });
    group.trajectories.push_back(std::move(traj));
    group.records.push_back(std::move(recs));
  }
  return group;
}

SurrogateResult surrogate_loss_and_grad(const RolloutGroup& group, const AdvantageMatrix& adv,
                                        const PolicyParams& params, double clip_epsilon) {
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw ValidationError("clip_epsilon", "must lie in (0, 1)");
  }
  const std::size_t g = group.group_size();
  if (adv.group_size() != g || group.records.size() != g) {
    throw ValidationError("advantages", "group size does not match rollout");
  }
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t len = group.turn_count(i);
    if (len > adv.max_turns()) throw ValidationError("advantages", "fewer columns than turns");
    for (std::size_t j = 0; j < adv.max_turns(); ++j) {
      if ((adv.mask(i, j) != 0) != (j < len)) {
        throw ValidationError("advantages", "mask does not match turn structure of trajectory " +
                                                std::to_string(i));
      }
    }
  }

  SurrogateResult out{0.0, Matrix<double>(params.num_features(), params.num_actions(), 0.0), 0, 0};
  const double inv_g = 1.0 / static_cast<double>(g);
  const double lo = 1.0 - clip_epsilon;
  const double hi = 1.0 + clip_epsilon;
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < group.turn_count(i); ++j) {
      const ActionRecord& rec = group.records[i][j];
      const double a_hat = adv.advantages(i, j);
      ++out.n_terms;
      const std::vector<double> logp = action_log_distribution(params, rec.features);
      const double w = std::exp(logp[rec.action] - rec.log_prob_old);
      const double unclipped = w * a_hat;
      const double clipped = std::clamp(w, lo, hi) * a_hat;
      if (clipped < unclipped) {
        out.loss -= inv_g * clipped;
        ++out.n_clipped;
        continue;
      }
      out.loss -= inv_g * unclipped;
      if (a_hat == 0.0) continue;
      std::vector<double> p(logp.size());
      std::transform(logp.begin(), logp.end(), p.begin(), [](double v) { return std::exp(v); });
      // d(w A)/dW = A w grad log pi.
      add_log_prob_gradient(out.grad, rec.features, p, rec.action, -inv_g * a_hat * w);
    }
  }
  return out;
}

}  // namespace tspo

#pragma once

#include <vector>

#include "tspo/advantage.hpp"
#include "tspo/environment.hpp"
#include "tspo/policy.hpp"
#include "tspo/random.hpp"

namespace tspo {

// One sampled action with the log-probability it had under the sampling
// policy (pi_old).
struct ActionRecord {
  std::vector<double> features;
  std::size_t action = 0;
  double log_prob_old = 0.0;
};

struct RolloutGroup {
  std::size_t question_id = 0;
  GoldAnswer gold;
  std::vector<Trajectory> trajectories;
  std::vector<std::vector<ActionRecord>> records;  // records[i][j]: turn j + 1 of trajectory i

  std::size_t group_size() const noexcept { return trajectories.size(); }
  std::size_t turn_count(std::size_t i) const { return records[i].size(); }
  std::size_t max_turns() const;
  // Features of every visited state, in trajectory-major order.
  std::vector<std::vector<double>> visited_states() const;
};

// G independent episodes sampled from `params`.
RolloutGroup rollout_group(const PolicyParams& params, const Environment& env,
                           std::size_t question_id, std::size_t group_size, Rng& rng);

struct SurrogateResult {
  double loss = 0.0;
  Matrix<double> grad;
  std::size_t n_terms = 0;    // masked-in turns
  std::size_t n_clipped = 0;  // terms on the zero-gradient clipped branch
};

inline constexpr double kDefaultClipEpsilon = 0.2;

// loss = -(1/G) sum_i sum_j m_ij min(w A, clip(w, 1 - eps, 1 + eps) A),
// w = pi_params(a | s) / pi_old(a | s), one action per turn. When the clipped
// value is the smaller one the term contributes no gradient.
SurrogateResult surrogate_loss_and_grad(const RolloutGroup& group, const AdvantageMatrix& adv,
                                        const PolicyParams& params,
                                        double clip_epsilon = kDefaultClipEpsilon);

}  // namespace tspo

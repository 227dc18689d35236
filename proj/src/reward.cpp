#include "tspo/reward.hpp"

#include <algorithm>

#include "tspo/error.hpp"

namespace tspo {

const char* to_string(GroupType t) noexcept {
  switch (t) {
    case GroupType::AllCorrect: return "all-correct";
    case GroupType::AllWrong: return "all-wrong";
    case GroupType::Mixed: return "mixed";
  }
  return "?";
}

const char* to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::NoneStrategy: return "none";
    case Strategy::AllGroups: return "all-groups";
    case Strategy::AllWrongGroups: return "all-wrong";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "none" || name == "NoneStrategy") return Strategy::NoneStrategy;
  if (name == "all-groups" || name == "all" || name == "AllGroups") return Strategy::AllGroups;
  if (name == "all-wrong" || name == "AllWrongGroups") return Strategy::AllWrongGroups;
  throw ValidationError("strategy", "unknown strategy '" + std::string(name) +
                                        "' (expected none, all-groups or all-wrong)");
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha", "must lie in [0, 1], got " + std::to_string(alpha));
  }
}

double outcome_reward(const Trajectory& traj, const GoldAnswer& gold) {
  return exact_match(traj.final_answer, gold) ? 1.0 : 0.0;
}

std::vector<double> folr_turn_rewards(const Trajectory& traj, const GoldAnswer& gold, double alpha) {
  check_alpha(alpha);
  const std::size_t k = traj.size();
  if (outcome_reward(traj, gold) == 1.0) return std::vector<double>(k, 1.0);

  std::vector<double> out(k, 0.0);
  if (const auto t_star = first_occurrence_turn(traj, gold)) {
    for (std::size_t i = 0; i < k && traj.turns[i].index <= *t_star; ++i) out[i] = alpha;
  }
  return out;
}

GroupType classify_group(std::span<const double> outcome_rewards) {
  if (outcome_rewards.empty()) throw ValidationError("group", "empty group");
  const bool all_one = std::all_of(outcome_rewards.begin(), outcome_rewards.end(),
                                   [](double r) { return r == 1.0; });
  if (all_one) return GroupType::AllCorrect;
  const bool all_zero = std::all_of(outcome_rewards.begin(), outcome_rewards.end(),
                                    [](double r) { return r == 0.0; });
  return all_zero ? GroupType::AllWrong : GroupType::Mixed;
}

RewardMatrix build_reward_matrix(std::span<const Trajectory> group, const GoldAnswer& gold,
                                 double alpha, Strategy strategy) {
  check_alpha(alpha);
  const std::size_t g = group.size();
  if (g == 0) throw ValidationError("group", "empty group");

  std::vector<double> outcomes(g);
  std::size_t k_max = 0;
  for (std::size_t i = 0; i < g; ++i) {
    outcomes[i] = outcome_reward(group[i], gold);
    k_max = std::max(k_max, group[i].size());
  }
  const GroupType type = classify_group(outcomes);
  const bool turn_level = strategy == Strategy::AllGroups ||
                          (strategy == Strategy::AllWrongGroups && type == GroupType::AllWrong);

  RewardMatrix rm{Matrix<double>(g, k_max), Mask(g, k_max, 0), type, alpha};
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t k = group[i].size();
    std::vector<double> row = turn_level ? folr_turn_rewards(group[i], gold, alpha)
                                         : std::vector<double>(k, outcomes[i]);
    const double pad = row.empty() ? outcomes[i] : row.back();
    for (std::size_t c = 0; c < k_max; ++c) {
      if (c < k) {
        rm.rewards(i, c) = row[c];
        rm.mask(i, c) = 1;
      } else {
        rm.rewards(i, c) = pad;
      }
    }
  }
  return rm;
}

nlohmann::json to_json(const RewardMatrix& rm) {
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json mask = nlohmann::json::array();
  for (std::size_t i = 0; i < rm.group_size(); ++i) {
    auto r = rm.rewards.row(i);
    auto m = rm.mask.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
    nlohmann::json mrow = nlohmann::json::array();
    for (unsigned char b : m) mrow.push_back(b != 0);
    mask.push_back(std::move(mrow));
  }
  return {{"rows", rows}, {"mask", mask}, {"group_type", to_string(rm.group_type)}, {"alpha", rm.alpha}};
}

}  // namespace tspo

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tspo/matrix.hpp"
#include "tspo/trajectory.hpp"

namespace tspo {

enum class GroupType { AllCorrect, AllWrong, Mixed };

// Which groups receive first-occurrence turn rewards. The others carry their
// outcome reward replicated across every turn.
enum class Strategy { NoneStrategy, AllGroups, AllWrongGroups };

const char* to_string(GroupType t) noexcept;
const char* to_string(Strategy s) noexcept;
// Accepts "none", "all-groups", "all-wrong" (and the enum spellings).
Strategy parse_strategy(std::string_view name);

inline constexpr double kDefaultAlpha = 1.0;

// Per-turn rewards of one sampling group, padded to the longest trajectory.
// Padded cells repeat that row's final-turn reward and have mask 0.
struct RewardMatrix {
  Matrix<double> rewards;
  Mask mask;
  GroupType group_type = GroupType::Mixed;
  double alpha = kDefaultAlpha;

  std::size_t group_size() const noexcept { return rewards.rows(); }
  std::size_t max_turns() const noexcept { return rewards.cols(); }
};

double outcome_reward(const Trajectory& traj, const GoldAnswer& gold);

// Turn k gets 1 when the final answer is correct, alpha when it is wrong and
// k <= t*, and 0 otherwise.
std::vector<double> folr_turn_rewards(const Trajectory& traj, const GoldAnswer& gold, double alpha);

GroupType classify_group(std::span<const double> outcome_rewards);

// A group of one is accepted; its advantages come out as zero.
RewardMatrix build_reward_matrix(std::span<const Trajectory> group, const GoldAnswer& gold,
                                 double alpha, Strategy strategy);

void check_alpha(double alpha);

nlohmann::json to_json(const RewardMatrix& rm);

}  // namespace tspo

#include "tspo/advantage.hpp"

#include <algorithm>
#include <cmath>

#include "tspo/error.hpp"

namespace tspo {

std::vector<double> group_normalize(std::span<const double> values, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("norm_epsilon", "must be positive");
  const std::size_t g = values.size();
  std::vector<double> out(g, 0.0);
  if (g == 0) return out;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
    return out;
  }

  double sum = 0.0;
  double scale = 0.0;
  for (double v : values) {
    sum += v;
    scale = std::max(scale, std::abs(v));
  }
  const double mean = sum / static_cast<double>(g);
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  const double std_dev = std::sqrt(sq / static_cast<double>(g));
  const double denom = std_dev + epsilon * scale;
  for (std::size_t i = 0; i < g; ++i) out[i] = (values[i] - mean) / denom;
  return out;
}

std::vector<double> trajectory_advantages(std::span<const double> outcome_rewards, double epsilon) {
  return group_normalize(outcome_rewards, epsilon);
}

AdvantageMatrix turn_advantages(const RewardMatrix& rm, double epsilon) {
  const std::size_t g = rm.group_size();
  const std::size_t k = rm.max_turns();
  AdvantageMatrix am{Matrix<double>(g, k), rm.mask, epsilon};
  // Pads take the row's last real reward, whatever the stored cell holds, so
  // masked cells are never read.
  std::vector<std::size_t> last(g, 0);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      if (rm.mask(i, c)) last[i] = c;
    }
  }
  std::vector<double> column(g);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < g; ++i) {
      column[i] = rm.mask(i, c) ? rm.rewards(i, c) : rm.rewards(i, std::min(c, last[i]));
    }
    const std::vector<double> adv = group_normalize(column, epsilon);
    for (std::size_t i = 0; i < g; ++i) am.advantages(i, c) = adv[i];
  }
  return am;
}

nlohmann::json to_json(const AdvantageMatrix& am) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < am.group_size(); ++i) {
    auto r = am.advantages.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"advantages", rows}, {"epsilon", am.epsilon}};
}

}  // namespace tspo

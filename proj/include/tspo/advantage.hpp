#pragma once

#include <span>
#include <vector>

#include "json.hpp"
#include "tspo/matrix.hpp"
#include "tspo/reward.hpp"

namespace tspo {

inline constexpr double kDefaultNormEpsilon = 1e-6;

struct AdvantageMatrix {
  Matrix<double> advantages;
  Mask mask;  // copied from the RewardMatrix; 0 cells never enter the loss
  double epsilon = kDefaultNormEpsilon;

  std::size_t group_size() const noexcept { return advantages.rows(); }
  std::size_t max_turns() const noexcept { return advantages.cols(); }
};

// (v_i - mean) / (std + epsilon * scale), population std, scale = max |v_i|.
//
// For rewards in {0, 1} the scale is 1 and this is the usual group-relative
// normalization. Scaling epsilon with the rewards makes the output invariant
// to rescaling the column, so {0, alpha} columns give the same advantages for
// every alpha > 0. A constant column yields exact zeros.
std::vector<double> group_normalize(std::span<const double> values,
                                    double epsilon = kDefaultNormEpsilon);

std::vector<double> trajectory_advantages(std::span<const double> outcome_rewards,
                                          double epsilon = kDefaultNormEpsilon);

// Each column normalized across all G rows. Padded cells take part with the
// row's final-turn reward, read from the last real turn rather than the pad
// cell itself.
AdvantageMatrix turn_advantages(const RewardMatrix& rm, double epsilon = kDefaultNormEpsilon);

nlohmann::json to_json(const AdvantageMatrix& am);

}  // namespace tspo

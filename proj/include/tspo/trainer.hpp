#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "tspo/advantage.hpp"
#include "tspo/environment.hpp"
#include "tspo/objective.hpp"
#include "tspo/policy.hpp"
#include "tspo/reward.hpp"

namespace tspo {

struct TrainConfig {
  double alpha = kDefaultAlpha;
  Strategy strategy = Strategy::AllWrongGroups;
  std::size_t group_size = 5;
  double clip_epsilon = kDefaultClipEpsilon;
  double kl_beta = 1e-3;
  double norm_epsilon = kDefaultNormEpsilon;
  double learning_rate = 1.0;
  std::size_t steps = 300;
  std::size_t batch_questions = 8;
  std::uint64_t seed = 0;
  // Gradient updates per rollout batch. Above 1 the ratio w departs from 1
  // and the clipped branch becomes reachable.
  std::size_t inner_epochs = 1;
  // OpenMP threads for the parallel step; 0 keeps the runtime default.
  int threads = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct StepMetrics {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
  double grad_norm = 0.0;
  double surrogate_grad_norm = 0.0;
  double frac_all_correct = 0.0;
  double frac_mixed = 0.0;
  double frac_all_wrong = 0.0;
  double mean_len = 0.0;
  std::size_t n_opp = 0;
  std::size_t n_omp = 0;
  std::size_t n_omm = 0;
  std::size_t n_opm = 0;

  bool operator==(const StepMetrics&) const = default;
};

// Everything computed for one sampling group during a step.
struct GroupRecord {
  std::size_t step = 0;
  std::size_t slot = 0;
  RolloutGroup rollout;
  RewardMatrix rewards;
  AdvantageMatrix advantages;
};

enum class ExecutionMode { Serial, Parallel };

class Trainer {
 public:
  using GroupObserver = std::function<void(const GroupRecord&)>;

  Trainer(std::shared_ptr<const World> world, TrainConfig config);

  // One rollout / reward / advantage / update cycle over a batch of
  // questions. Serial and Parallel produce bitwise-identical results: groups
  // are computed independently and reduced in slot order.
  StepMetrics step(ExecutionMode mode = ExecutionMode::Parallel);

  // Called once per group, in slot order, after the batch is computed.
  void set_group_observer(GroupObserver observer) { observer_ = std::move(observer); }

  const PolicyParams& params() const noexcept { return current_; }
  const PolicyParams& reference() const noexcept { return reference_; }
  const TrainConfig& config() const noexcept { return config_; }
  const Environment& environment() const noexcept { return env_; }
  std::size_t steps_done() const noexcept { return step_; }

  // Questions drawn for step `step`: a seeded permutation, cycled when the
  // batch exceeds the question pool.
  std::vector<std::size_t> batch_for_step(std::size_t step) const;

 private:
  GroupRecord compute_group(std::size_t slot, std::size_t question_id) const;
  Matrix<double> group_gradient(const GroupRecord& rec, const PolicyParams& params,
                                Matrix<double>* surrogate_only) const;

  Environment env_;
  TrainConfig config_;
  PolicyParams current_;
  PolicyParams reference_;
  std::size_t step_ = 0;
  GroupObserver observer_;
};

struct TrainResult {
  PolicyParams params;
  std::vector<StepMetrics> metrics;
};

TrainResult train(std::shared_ptr<const World> world, const TrainConfig& config,
                  ExecutionMode mode = ExecutionMode::Parallel,
                  const Trainer::GroupObserver& observer = {});

}  // namespace tspo

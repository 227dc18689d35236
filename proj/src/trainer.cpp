#include "tspo/trainer.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>

#include <omp.h>

#include "tspo/error.hpp"
#include "tspo/random.hpp"

namespace tspo {

namespace {

constexpr std::uint64_t kBatchStream = 0x6261746368ULL;

struct GroupGradient {
  Matrix<double> total;
  Matrix<double> surrogate;
  double kl = 0.0;
};

double l2_norm(const Matrix<double>& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

// Runs fn(slot) for every slot, on an OpenMP team or in order. The first
// exception thrown by any slot is rethrown on the calling thread.
template <typename Fn>
void for_each_slot(ExecutionMode mode, int threads, std::size_t n, Fn&& fn) {
  if (mode == ExecutionMode::Serial) {
    for (std::size_t b = 0; b < n; ++b) fn(b);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  const int team = threads > 0 ? threads : omp_get_max_threads();
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(team)
  for (std::ptrdiff_t b = 0; b < count; ++b) {
    try {
      fn(static_cast<std::size_t>(b));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

void TrainConfig::validate() const {
  check_alpha(alpha);
  if (group_size < 2) throw ValidationError("group_size", "must be at least 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ValidationError("clip_epsilon", "must lie in (0, 1)");
  if (!(kl_beta >= 0.0)) throw ValidationError("kl_beta", "must be non-negative");
  if (!(norm_epsilon > 0.0)) throw ValidationError("norm_epsilon", "must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate", "must be a positive finite number");
  }
  if (batch_questions < 1) throw ValidationError("batch_questions", "must be at least 1");
  if (inner_epochs < 1) throw ValidationError("inner_epochs", "must be at least 1");
  if (threads < 0) throw ValidationError("threads", "must be non-negative");
}

Trainer::Trainer(std::shared_ptr<const World> world, TrainConfig config)
    : env_(std::move(world)), config_(config) {
  config_.validate();
  current_ = PolicyParams(env_.num_features(), env_.num_actions());
  reference_ = current_;
}

std::vector<std::size_t> Trainer::batch_for_step(std::size_t step) const {
  const std::size_t nq = env_.world().questions.size();
  std::vector<std::size_t> perm(nq);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(config_.seed, kBatchStream, step));
  shuffle<std::size_t>(perm, rng);
  std::vector<std::size_t> batch(config_.batch_questions);
  for (std::size_t b = 0; b < batch.size(); ++b) batch[b] = perm[b % nq];
  return batch;
}

GroupRecord Trainer::compute_group(std::size_t slot, std::size_t question_id) const {
  Rng rng(derive_seed(config_.seed, step_ + 1, slot + 1));
  GroupRecord rec;
  rec.step = step_;
  rec.slot = slot;
  rec.rollout = rollout_group(current_, env_, question_id, config_.group_size, rng);
  // Groups outside the strategy carry replicated outcome rewards, so turn-level
  // normalization reproduces the trajectory-level advantages for them.
  rec.rewards = build_reward_matrix(rec.rollout.trajectories, rec.rollout.gold, config_.alpha,
                                    config_.strategy);
  rec.advantages = turn_advantages(rec.rewards, config_.norm_epsilon);
  return rec;
}

Matrix<double> Trainer::group_gradient(const GroupRecord& rec, const PolicyParams& params,
                                       Matrix<double>* surrogate_only) const {
  SurrogateResult surr = surrogate_loss_and_grad(rec.rollout, rec.advantages, params, config_.clip_epsilon);
  if (surrogate_only) *surrogate_only = surr.grad;
  Matrix<double> total = std::move(surr.grad);
  if (config_.kl_beta > 0.0) {
    const KlResult kl = kl_divergence_and_grad(params, reference_, rec.rollout.visited_states());
    for (std::size_t i = 0; i < total.size(); ++i) total.data()[i] += config_.kl_beta * kl.grad.data()[i];
  }
  return total;
}

StepMetrics Trainer::step(ExecutionMode mode) {
  const std::vector<std::size_t> batch = batch_for_step(step_);
  const std::size_t n = batch.size();

  std::vector<GroupRecord> groups(n);
  std::vector<double> entropy_sum(n, 0.0);
  std::vector<double> kl_value(n, 0.0);
  std::vector<std::size_t> state_count(n, 0);
  for_each_slot(mode, config_.threads, n, [&](std::size_t b) {
    groups[b] = compute_group(b, batch[b]);
    const auto states = groups[b].rollout.visited_states();
    for (const auto& x : states) entropy_sum[b] += entropy(action_distribution(current_, x));
    state_count[b] = states.size();
    kl_value[b] = kl_divergence(current_, reference_, states);
  });

  StepMetrics m;
  m.step = step_;
  std::size_t n_traj = 0;
  std::size_t n_states = 0;
  double reward_sum = 0.0;
  double entropy_total = 0.0;
  double kl_total = 0.0;
  std::size_t n_correct = 0, n_wrong = 0, n_mixed = 0;
  for (std::size_t b = 0; b < n; ++b) {
    const GroupRecord& g = groups[b];
    switch (g.rewards.group_type) {
      case GroupType::AllCorrect: ++n_correct; break;
      case GroupType::AllWrong: ++n_wrong; break;
      case GroupType::Mixed: ++n_mixed; break;
    }
    for (const Trajectory& t : g.rollout.trajectories) {
      reward_sum += outcome_reward(t, g.rollout.gold);
      switch (classify_trajectory(t, g.rollout.gold)) {
        case TrajectoryCategory::OPlusPPlus: ++m.n_opp; break;
        case TrajectoryCategory::OMinusPPlus: ++m.n_omp; break;
        case TrajectoryCategory::OMinusPMinus: ++m.n_omm; break;
        case TrajectoryCategory::OPlusPMinus: ++m.n_opm; break;
      }
      ++n_traj;
    }
    entropy_total += entropy_sum[b];
    n_states += state_count[b];
    kl_total += kl_value[b];
  }
  m.mean_reward = reward_sum / static_cast<double>(n_traj);
  m.entropy = entropy_total / static_cast<double>(n_states);
  m.kl = kl_total / static_cast<double>(n);
  m.frac_all_correct = static_cast<double>(n_correct) / static_cast<double>(n);
  m.frac_mixed = static_cast<double>(n_mixed) / static_cast<double>(n);
  m.frac_all_wrong = static_cast<double>(n_wrong) / static_cast<double>(n);
  m.mean_len = static_cast<double>(n_states) / static_cast<double>(n_traj);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t epoch = 0; epoch < config_.inner_epochs; ++epoch) {
    std::vector<Matrix<double>> grads(n);
    std::vector<Matrix<double>> surrogate(n);
    const bool first = epoch == 0;
    for_each_slot(mode, config_.threads, n, [&](std::size_t b) {
      grads[b] = group_gradient(groups[b], current_, first ? &surrogate[b] : nullptr);
    });

    Matrix<double> total(current_.num_features(), current_.num_actions(), 0.0);
    Matrix<double> surrogate_total = total;
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t i = 0; i < total.size(); ++i) {
        total.data()[i] += grads[b].data()[i] * inv_n;
        if (first) surrogate_total.data()[i] += surrogate[b].data()[i] * inv_n;
      }
    }
    if (first) {
      m.grad_norm = l2_norm(total);
      m.surrogate_grad_norm = l2_norm(surrogate_total);
    }
    for (std::size_t i = 0; i < total.size(); ++i) {
      current_.weights.data()[i] -= config_.learning_rate * total.data()[i];
    }
  }

  if (observer_) {
    for (const GroupRecord& g : groups) observer_(g);
  }
  ++step_;
  return m;
}

TrainResult train(std::shared_ptr<const World> world, const TrainConfig& config, ExecutionMode mode,
                  const Trainer::GroupObserver& observer) {
  Trainer trainer(std::move(world), config);
  if (observer) trainer.set_group_observer(observer);
  TrainResult out;
  out.metrics.reserve(config.steps);
  for (std::size_t s = 0; s < config.steps; ++s) out.metrics.push_back(trainer.step(mode));
  out.params = trainer.params();
  return out;
}

}  // namespace tspo

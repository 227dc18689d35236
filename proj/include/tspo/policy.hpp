#pragma once

#include <utility>

#include <span>
#include <vector>

#include "tspo/matrix.hpp"

namespace tspo {

// Linear-softmax policy: pi(a | x) = softmax(x^T W)_a with W of shape
// features x actions.
struct PolicyParams {
  Matrix<double> weights;

  PolicyParams() = default;
  PolicyParams(std::size_t n_features, std::size_t n_actions) : weights(n_features, n_actions, 0.0) {}
  explicit PolicyParams(Matrix<double> w) : weights(std::move(w)) {}

  std::size_t num_features() const noexcept { return weights.rows(); }
  std::size_t num_actions() const noexcept { return weights.cols(); }
  bool operator==(const PolicyParams&) const = default;
};

std::vector<double> logits(const PolicyParams& params, std::span<const double> features);
std::vector<double> log_softmax(std::span<const double> z);
std::vector<double> softmax(std::span<const double> z);

// Throws ValidationError on a feature dimension mismatch.
std::vector<double> action_distribution(const PolicyParams& params, std::span<const double> features);
std::vector<double> action_log_distribution(const PolicyParams& params, std::span<const double> features);

double entropy(std::span<const double> probs);

// Accumulates scale * x (e_a - pi)^T, the gradient of scale * log pi(a | x).
void add_log_prob_gradient(Matrix<double>& grad, std::span<const double> features,
                           std::span<const double> probs, std::size_t action, double scale);

struct KlResult {
  double value = 0.0;
  Matrix<double> grad;  // d value / d params.weights
};

// Mean over states of KL(pi_params(.|s) || pi_ref(.|s)), computed exactly
// over the discrete action set.
double kl_divergence(const PolicyParams& params, const PolicyParams& ref,
                     std::span<const std::vector<double>> states);
KlResult kl_divergence_and_grad(const PolicyParams& params, const PolicyParams& ref,
                                std::span<const std::vector<double>> states);

}  // namespace tspo

#include "tspo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tspo/error.hpp"

namespace tspo {

namespace {

void check_dims(const PolicyParams& params, std::span<const double> features) {
  if (features.size() != params.num_features()) {
    throw ValidationError("features", "dimension " + std::to_string(features.size()) +
                                          " does not match policy input " +
                                          std::to_string(params.num_features()));
  }
}

}  // namespace

std::vector<double> logits(const PolicyParams& params, std::span<const double> features) {
  check_dims(params, features);
  std::vector<double> z(params.num_actions(), 0.0);
  for (std::size_t f = 0; f < features.size(); ++f) {
    const double xf = features[f];
    if (xf == 0.0) continue;
    auto row = params.weights.row(f);
    for (std::size_t a = 0; a < z.size(); ++a) z[a] += xf * row[a];
  }
  return z;
}

std::vector<double> log_softmax(std::span<const double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - zmax);
  const double lse = zmax + std::log(sum);
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> out = log_softmax(z);
  for (double& v : out) v = std::exp(v);
  return out;
}

std::vector<double> action_distribution(const PolicyParams& params, std::span<const double> features) {
  return softmax(logits(params, features));
}

std::vector<double> action_log_distribution(const PolicyParams& params, std::span<const double> features) {
  return log_softmax(logits(params, features));
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

void add_log_prob_gradient(Matrix<double>& grad, std::span<const double> features,
                           std::span<const double> probs, std::size_t action, double scale) {
  for (std::size_t f = 0; f < features.size(); ++f) {
    const double xf = features[f] * scale;
    if (xf == 0.0) continue;
    auto row = grad.row(f);
    for (std::size_t a = 0; a < probs.size(); ++a) row[a] -= xf * probs[a];
    row[action] += xf;
  }
}

namespace {

// KL at one state and its gradient w.r.t. logits: pi_b (d_b - KL) with
// d_b = log pi_b - log ref_b.
double state_kl(const PolicyParams& params, const PolicyParams& ref, std::span<const double> x,
                std::vector<double>* dlogits) {
  const std::vector<double> lp = action_log_distribution(params, x);
  const std::vector<double> lr = action_log_distribution(ref, x);
  double kl = 0.0;
  for (std::size_t a = 0; a < lp.size(); ++a) kl += std::exp(lp[a]) * (lp[a] - lr[a]);
  if (dlogits) {
    dlogits->resize(lp.size());
    for (std::size_t a = 0; a < lp.size(); ++a) (*dlogits)[a] = std::exp(lp[a]) * (lp[a] - lr[a] - kl);
  }
  return kl;
}

}  // namespace

double kl_divergence(const PolicyParams& params, const PolicyParams& ref,
                     std::span<const std::vector<double>> states) {
  if (states.empty()) return 0.0;
  double total = 0.0;
  for (const auto& x : states) total += state_kl(params, ref, x, nullptr);
  // Round-off can leave a tiny negative value for identical distributions.
  return std::max(0.0, total / static_cast<double>(states.size()));
}

KlResult kl_divergence_and_grad(const PolicyParams& params, const PolicyParams& ref,
                                std::span<const std::vector<double>> states) {
  KlResult out{0.0, Matrix<double>(params.num_features(), params.num_actions(), 0.0)};
  if (states.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(states.size());
  std::vector<double> dz;
  for (const auto& x : states) {
    out.value += state_kl(params, ref, x, &dz);
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double xf = x[f] * inv_n;
      if (xf == 0.0) continue;
      auto row = out.grad.row(f);
      for (std::size_t a = 0; a < dz.size(); ++a) row[a] += xf * dz[a];
    }
  }
  out.value = std::max(0.0, out.value * inv_n);
  return out;
}

}  // namespace tspo

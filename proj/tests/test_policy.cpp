#include <cmath>

#include "doctest.h"
#include "instances.hpp"
#include "oracles.hpp"
#include "tspo/error.hpp"
#include "tspo/policy.hpp"

using namespace tspo;

TEST_SUITE("policy") {

TEST_CASE("action_distribution examples") {
  PolicyParams p(3, 4);
  const std::vector<double> x = {1.0, 0.5, -2.0};
  for (double v : action_distribution(p, x)) CHECK(v == doctest::Approx(0.25));

  Rng rng(41);
  oracle::fill_gaussian(p.weights, rng, 1.0);
  const auto base = action_distribution(p, x);
  PolicyParams shifted = p;
  // adding c to every logit (through the bias-like first feature) is a no-op
  for (std::size_t a = 0; a < 4; ++a) shifted.weights(0, a) += 3.7;
  const auto after = action_distribution(shifted, x);
  for (std::size_t a = 0; a < 4; ++a) CHECK(std::abs(after[a] - base[a]) < 1e-12);

  PolicyParams big(3, 4);
  big.weights(0, 2) = 60.0;
  CHECK(action_distribution(big, x)[2] > 1.0 - 1e-12);
  CHECK_THROWS_AS(action_distribution(p, std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("distributions are normalized and positive") {
  Rng rng(42);
  for (int n = 0; n < 200; ++n) {
    PolicyParams p(5, 6);
    oracle::fill_gaussian(p.weights, rng, 5.0);
    std::vector<double> x(5);
    for (auto& v : x) v = oracle::gaussian(rng);
    const auto probs = action_distribution(p, x);
    double s = 0;
    for (double v : probs) {
      CHECK(v > 0.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-9);
    const auto lp = action_log_distribution(p, x);
    for (std::size_t a = 0; a < 6; ++a) CHECK(std::abs(std::exp(lp[a]) - probs[a]) < 1e-12);
  }
}

TEST_CASE("entropy") {
  CHECK(entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == doctest::Approx(std::log(4.0)));
  CHECK(entropy(std::vector<double>{1.0, 0.0}) == 0.0);
}

TEST_CASE("kl examples") {
  // one state, one feature: logits are the weight row itself
  PolicyParams p(1, 3), q(1, 3);
  const std::vector<double> pa = {0.5, 0.3, 0.2}, qa = {0.2, 0.2, 0.6};
  for (std::size_t a = 0; a < 3; ++a) {
    p.weights(0, a) = std::log(pa[a]);
    q.weights(0, a) = std::log(qa[a]);
  }
  const std::vector<std::vector<double>> states = {{1.0}};
  double hand = 0;
  for (std::size_t a = 0; a < 3; ++a) hand += pa[a] * std::log(pa[a] / qa[a]);
  CHECK(std::abs(kl_divergence(p, q, states) - hand) < 1e-12);
  CHECK(kl_divergence(p, p, states) == 0.0);
  CHECK(kl_divergence(p, q, {}) == 0.0);
}

TEST_CASE("kl is non-negative") {
  Rng rng(43);
  for (int n = 0; n < 200; ++n) {
    PolicyParams p(4, 5), q(4, 5);
    oracle::fill_gaussian(p.weights, rng, 2.0);
    oracle::fill_gaussian(q.weights, rng, 2.0);
    std::vector<std::vector<double>> states(3, std::vector<double>(4));
    for (auto& s : states)
      for (auto& v : s) v = oracle::gaussian(rng);
    CHECK(kl_divergence(p, q, states) >= 0.0);
    CHECK(kl_divergence_and_grad(p, q, states).value == doctest::Approx(kl_divergence(p, q, states)));
  }
}

TEST_CASE("kl gradient matches finite differences") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const fixture::Instance in = fixture::random_instance(seed);
    const auto states = in.group.visited_states();
    const KlResult k = kl_divergence_and_grad(in.params, in.old_params, states);
    const auto fd = oracle::finite_difference(
        [&](const Matrix<double>& w) { return kl_divergence(PolicyParams{w}, in.old_params, states); },
        in.params.weights);
    CHECK(oracle::relative_error(k.grad, fd) <= 1e-4);
  }
}

TEST_CASE("log-prob gradient matches finite differences") {
  Rng rng(44);
  PolicyParams p(4, 3);
  oracle::fill_gaussian(p.weights, rng, 1.0);
  const std::vector<double> x = {1.0, -0.5, 0.25, 2.0};
  for (std::size_t a = 0; a < 3; ++a) {
    Matrix<double> g(4, 3, 0.0);
    add_log_prob_gradient(g, x, action_distribution(p, x), a, 1.0);
    const auto fd = oracle::finite_difference(
        [&](const Matrix<double>& w) { return action_log_distribution(PolicyParams{w}, x)[a]; }, p.weights);
    CHECK(oracle::relative_error(g, fd) <= 1e-6);
  }
}

}  // TEST_SUITE

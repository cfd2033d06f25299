#include "doctest.h"

#include <cmath>

#include "statlens/optim.hpp"

#include "support/test_helpers.hpp"

using namespace statlens;
using namespace statlens::testing;

TEST_CASE("minimize descends a quadratic bowl") {
  Objective f = [](const std::vector<double>& x) {
    return (x[0] - 3.0) * (x[0] - 3.0) + 2.0 * (x[1] + 1.0) * (x[1] + 1.0);
  };
  const auto r = minimize(f, std::nullopt, {0.0, 0.0}, OptimConfig{});
  CHECK(r.converged);
  CHECK(r.best_params[0] == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(r.best_params[1] == doctest::Approx(-1.0).epsilon(1e-4));
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    CHECK(r.trace[i] <= r.trace[i - 1]);
  }
}

TEST_CASE("minimize rejects an infinite starting point") {
  Objective f = [](const std::vector<double>&) {
    return std::numeric_limits<double>::infinity();
  };
  CHECK_THROWS_AS(minimize(f, std::nullopt, {0.0}, OptimConfig{}), DivergedFitness);
}

TEST_CASE("simplex family rows are softmax distributions") {
  const FiniteSpace x = make_space("x", 3);
  SimplexFamily family(x, 2, {0.0, 1.0, 2.0, -1.0, -1.0, -1.0});
  const auto row0 = family.row_dist(0);
  const double z = std::exp(0.0) + std::exp(1.0) + std::exp(2.0);
  CHECK(row0.weights()[2] == doctest::Approx(std::exp(2.0) / z).epsilon(1e-14));
  CHECK(max_abs_diff(family.row_dist(1), Dist<double>::uniform(x)) < 1e-15);
  CHECK_THROWS_AS(family.as_dist(), InvalidValue);
  CHECK(family.as_kernel(binary_space()).dom() == binary_space());
}

TEST_CASE("analytic autoencoder gradients match central differences") {
  SplitMix64 rng(90);
  const FiniteSpace x = make_space("x", 3);
  const FiniteSpace y = make_space("y", 2);
  const auto forward = random_float_kernel(rng, x, y);
  const auto ctx = simple_context<double>(
      random_float_dist(rng, x), evidence_continuation<double>(FiniteSpace::unit(), y));
  const auto objective = autoencoder_kl_objective(forward, ctx);
  REQUIRE(objective.gradient.has_value());

  for (int point = 0; point < 100; ++point) {
    std::vector<double> logits(y.size() * x.size());
    for (auto& v : logits) v = rng.real(-2.0, 2.0);
    const auto analytic = (*objective.gradient)(logits);
    const auto numeric = finite_difference_gradient(objective.value, logits, 1e-5);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
      CHECK(std::abs(analytic[i] - numeric[i]) / scale < 1e-4);
    }
  }
}

TEST_CASE("the analytic objective value agrees with the games-module fitness") {
  SplitMix64 rng(91);
  const FiniteSpace x = make_space("x", 3);
  const FiniteSpace y = make_space("y", 2);
  const auto forward = random_float_kernel(rng, x, y);
  const auto ctx = simple_context<double>(
      random_float_dist(rng, x), evidence_continuation<double>(FiniteSpace::unit(), y));
  const auto fast = autoencoder_kl_objective(forward, ctx);
  const auto slow = autoencoder_objective(forward, ctx, kl_fn<double>());
  for (int point = 0; point < 20; ++point) {
    std::vector<double> logits(y.size() * x.size());
    for (auto& v : logits) v = rng.real(-2.0, 2.0);
    CHECK(fast.value(logits) == doctest::Approx(slow.value(logits)).epsilon(1e-12));
  }
}

TEST_CASE("variational update optimization recovers the exact posterior") {
  const FiniteSpace bit = binary_space();
  const auto forward = bsc<double>(0.8, bit);
  const auto uniform = Dist<double>::uniform(bit);
  const auto ctx = simple_context<double>(
      uniform, evidence_continuation<double>(FiniteSpace::unit(), bit));

  const auto objective = autoencoder_kl_objective(forward, ctx);
  const SimplexFamily family(bit, bit.size());
  const auto result = optimize_fitness(objective, family, OptimConfig{});

  CHECK(result.iterations <= 5000);
  const auto fitted = family.with_logits(result.best_params).as_kernel(bit);
  const auto exact = invert(forward, uniform).posterior;
  for (std::size_t obs = 0; obs < bit.size(); ++obs) {
    CHECK(tv_distance(fitted.row(obs), exact.row(obs)) < 1e-4);
  }
  // optimum value is the expected surprisal, here log 2
  CHECK(result.best_value == doctest::Approx(std::log(2.0)).epsilon(1e-6));

  // the trace is monotone non-increasing
  for (std::size_t i = 1; i < result.trace.size(); ++i) {
    CHECK(result.trace[i] <= result.trace[i - 1]);
  }
}

TEST_CASE("starting at the exact posterior stays there") {
  const FiniteSpace bit = binary_space();
  const auto forward = bsc<double>(0.8, bit);
  const auto uniform = Dist<double>::uniform(bit);
  const auto ctx = simple_context<double>(
      uniform, evidence_continuation<double>(FiniteSpace::unit(), bit));
  const auto objective = autoencoder_kl_objective(forward, ctx);

  const auto exact = invert(forward, uniform).posterior;
  std::vector<double> logits;
  for (std::size_t obs = 0; obs < bit.size(); ++obs) {
    for (std::size_t cause = 0; cause < bit.size(); ++cause) {
      logits.push_back(std::log(exact.row(obs).weights()[cause]));
    }
  }
  const auto result = optimize_fitness(objective, SimplexFamily(bit, bit.size(), logits),
                                       OptimConfig{});
  const double spread = *std::max_element(result.trace.begin(), result.trace.end()) -
                        *std::min_element(result.trace.begin(), result.trace.end());
  CHECK(spread < 1e-9);
  CHECK(result.best_value == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("coin maximum likelihood estimation hits the empirical frequency") {
  const FiniteSpace theta =
      FiniteSpace::make("theta", {"0.1", "0.3", "0.5", "0.7", "0.9"});
  const FiniteSpace coin = FiniteSpace::make("coin", {"H", "T"});
  std::vector<Dist<double>> rows;
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) rows.push_back(Dist<double>(coin, {t, 1.0 - t}));
  const Kernel<double> family(theta, coin, rows);
  const auto l = param_state_lens(family);

  const Dist<double> empirical(coin, {0.7, 0.3});  // 7 heads in 10 flips
  const auto ctx = simple_context<double>(Dist<double>::uniform(theta),
                                          constant_continuation(empirical));
  const auto objective = replay_mle_objective(l, ctx);
  REQUIRE(objective.gradient.has_value());

  const auto result = optimize_fitness(objective, SimplexFamily(theta, 1), OptimConfig{});
  const auto strategy = SimplexFamily(theta, 1, result.best_params).as_dist();
  const double theta_hat = pushforward(strategy, family).weight("H");
  CHECK(theta_hat == doctest::Approx(0.7).epsilon(1e-3 / 0.7));
  CHECK(std::abs(theta_hat - 0.7) <= 1e-3);

  // analytic gradient agrees with finite differences under replay feedback
  SplitMix64 rng(92);
  for (int point = 0; point < 50; ++point) {
    std::vector<double> logits(theta.size());
    for (auto& v : logits) v = rng.real(-2.0, 2.0);
    const auto analytic = (*objective.gradient)(logits);
    const auto numeric = finite_difference_gradient(objective.value, logits, 1e-5);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
      CHECK(std::abs(analytic[i] - numeric[i]) / scale < 1e-4);
    }
  }
}

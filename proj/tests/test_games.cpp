#include "doctest.h"

#include "statlens/games.hpp"

#include "support/test_helpers.hpp"

using namespace statlens;
using namespace statlens::testing;

namespace {

// Hand-expanded 1-local contexts, assembled from raw primitives in test code
// so the game_compose wiring is checked against an independent construction.
GameContext<double> hand_gstar_context(const GameContext<double>& ctx,
                                       const BayesianLens<double>& g) {
  Continuation<double> k = [ctx, g](const Dist<double>& sigma) {
    const auto extended = pushforward(
        sigma, tensor_kernels(Kernel<double>::identity(ctx.residual_fwd), g.forward()));
    const auto fb = ctx.continuation(extended);
    const auto gb = g.backward().at(marginal_right(sigma, ctx.residual_fwd, g.dom()));
    return pushforward(fb, tensor_kernels(Kernel<double>::identity(ctx.residual_bwd), gb));
  };
  return GameContext<double>{ctx.residual_fwd, ctx.residual_bwd, ctx.prior, std::move(k)};
}

GameContext<double> hand_fstar_context(const GameContext<double>& ctx,
                                       const BayesianLens<double>& f) {
  return GameContext<double>{
      ctx.residual_fwd, ctx.residual_bwd,
      pushforward(ctx.prior,
                  tensor_kernels(Kernel<double>::identity(ctx.residual_fwd), f.forward())),
      ctx.continuation};
}

}  // namespace

TEST_CASE("feedback with trivial residual is the continuation of the prediction") {
  const FiniteSpace bit = binary_space();
  const auto c = bsc<double>(0.8, bit);
  const auto lens = exact_lens(c);
  const Dist<double> pi(bit, {0.25, 0.75});

  SUBCASE("identity continuation returns the evidence") {
    const auto ctx = simple_context<double>(pi, identity_continuation<double>());
    CHECK(max_abs_diff(feedback(ctx, lens), pushforward(pi, c)) == 0.0);
  }

  SUBCASE("label flip returns the flipped evidence, against a hand-run pushforward") {
    const auto ctx = simple_context<double>(
        pi, permutation_continuation<double>(FiniteSpace::unit(), bit, {1, 0}));
    const auto fb = feedback(ctx, lens);
    // two-step pushforward by hand: evidence then swap
    const double ev0 = 0.8 * 0.25 + 0.2 * 0.75;
    CHECK(fb.weight("0") == doctest::Approx(1.0 - ev0).epsilon(1e-15));
    CHECK(fb.weight("1") == doctest::Approx(ev0).epsilon(1e-15));
  }
}

TEST_CASE("identity continuation with a residual gives the residual-marginalized prediction") {
  SplitMix64 rng(69);
  const FiniteSpace m = make_space("m", 3);
  const FiniteSpace x = make_space("x", 2);
  const FiniteSpace y = make_space("y", 2);
  const auto lens = exact_lens(random_rational_kernel(rng, x, y, true));
  const auto prior = random_rational_dist(rng, tensor(m, x), true);
  const GameContext<Rat> ctx{m, m, prior, identity_continuation<Rat>()};
  const auto expected = marginal_right(
      pushforward(prior, tensor_kernels(Kernel<Rat>::identity(m), lens.forward())), m, y);
  CHECK(feedback(ctx, lens) == expected);
}

TEST_CASE("feedback marginalizes the residual away") {
  SplitMix64 rng(70);
  const FiniteSpace x = make_space("x", 3);
  const FiniteSpace y = make_space("y", 2);
  const auto lens = exact_lens(random_float_kernel(rng, x, y));
  const auto ctx = random_simple_context(rng, x, y);
  const auto fb = feedback(ctx, lens);
  CHECK(fb.space() == y);

  // continuation output must land on N⊗B
  GameContext<double> bad{ctx.residual_fwd, ctx.residual_bwd, ctx.prior,
                          [&](const Dist<double>&) { return Dist<double>::uniform(x); }};
  if (!(tensor(bad.residual_bwd, y) == x)) {
    CHECK_THROWS_AS(feedback(bad, lens), SpaceMismatch);
  }
}

TEST_CASE("composing with the identity game changes nothing") {
  SplitMix64 rng(71);
  const FiniteSpace x = make_space("x", 2);
  const FiniteSpace y = make_space("y", 3);
  const auto game = make_autoencoder_game(exact_lens(random_float_kernel(rng, x, y)), kl_fn<double>());
  const auto pre = game_compose(identity_game<double>(x, x), game);
  const auto post = game_compose(game, identity_game<double>(y, y));
  for (int trial = 0; trial < 10; ++trial) {
    const auto ctx = random_simple_context(rng, x, y);
    const double base = game.fitness(ctx);
    CHECK(pre.fitness(ctx) == doctest::Approx(base).epsilon(1e-12));
    CHECK(post.fitness(ctx) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("composite fitness is the sum of hand-expanded local fitnesses") {
  SplitMix64 rng(72);
  for (int trial = 0; trial < 25; ++trial) {
    const FiniteSpace x = make_space("x", 1 + rng.below(3));
    const FiniteSpace y = make_space("y", 1 + rng.below(3));
    const FiniteSpace z = make_space("z", 1 + rng.below(3));
    const auto f = make_autoencoder_game(exact_lens(random_float_kernel(rng, x, y)), kl_fn<double>());
    const auto g = make_bayes_inference_game(exact_lens(random_float_kernel(rng, y, z)), kl_fn<double>());
    const auto fg = game_compose(f, g);
    const auto ctx = random_simple_context(rng, x, z);
    const double expanded =
        f.fitness(hand_gstar_context(ctx, g.lens)) + g.fitness(hand_fstar_context(ctx, f.lens));
    CHECK(fg.fitness(ctx) == doctest::Approx(expanded).epsilon(1e-12));
  }
}

TEST_CASE("composite fitness is associative on random triples") {
  SplitMix64 rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    const FiniteSpace x = make_space("x", 2);
    const FiniteSpace y = make_space("y", 2);
    const FiniteSpace z = make_space("z", 2);
    const FiniteSpace w = make_space("w", 2);
    const auto f = make_autoencoder_game(exact_lens(random_float_kernel(rng, x, y)), kl_fn<double>());
    const auto g = make_bayes_inference_game(exact_lens(random_float_kernel(rng, y, z)), kl_fn<double>());
    const auto h = make_autoencoder_game(exact_lens(random_float_kernel(rng, z, w)), kl_fn<double>());
    const auto left = game_compose(game_compose(f, g), h);
    const auto right = game_compose(f, game_compose(g, h));
    const auto ctx = random_simple_context(rng, x, w);
    const double lv = left.fitness(ctx);
    const double rv = right.fitness(ctx);
    CHECK(lv == doctest::Approx(rv).epsilon(1e-12));
  }
}

TEST_CASE("pulling back and pushing forward local contexts commute (h* f_* = f_* h*)") {
  SplitMix64 rng(74);
  for (int trial = 0; trial < 10; ++trial) {
    const FiniteSpace x = make_space("x", 2);
    const FiniteSpace y = make_space("y", 2);
    const FiniteSpace z = make_space("z", 2);
    const FiniteSpace w = make_space("w", 2);
    const auto f = exact_lens(random_float_kernel(rng, x, y));
    const auto g = exact_lens(random_float_kernel(rng, y, z));
    const auto h = exact_lens(random_float_kernel(rng, z, w));
    const auto ctx = random_simple_context(rng, x, w);

    const auto path1 = local_ctx_seq_first(local_ctx_seq_second(ctx, f), h);
    const auto path2 = local_ctx_seq_second(local_ctx_seq_first(ctx, h), f);
    CHECK(max_abs_diff(path1.prior, path2.prior) == 0.0);
    // continuations are opaque; compare through feedback and a fitness value
    CHECK(max_abs_diff(feedback(path1, g), feedback(path2, g)) < 1e-15);
    const auto fit = bayes_inference_fitness(g, kl_fn<double>());
    CHECK(fit(path1) == doctest::Approx(fit(path2)).epsilon(1e-12));
  }
}

TEST_CASE("identity filler leaves 2-local feedback unchanged") {
  SplitMix64 rng(75);
  for (int trial = 0; trial < 10; ++trial) {
    const FiniteSpace x = make_space("x", 2);
    const FiniteSpace y = make_space("y", 2);
    const FiniteSpace w = make_space("w", 2);
    const auto f = exact_lens(random_rational_kernel(rng, x, y, true));
    const auto id_w = identity_lens<Rat>(w);

    // context for f ⊗ id_w
    const FiniteSpace m = random_residual(rng, "m");
    const FiniteSpace n = random_residual(rng, "n");
    const auto prior = random_rational_dist(rng, tensor(m, tensor(x, w)), true);
    const auto k = pushforward_continuation(
        random_rational_kernel(rng, tensor(m, tensor(y, w)), tensor(n, tensor(y, w)), true));
    const GameContext<Rat> ctx{m, n, prior, k};

    const auto left = local_ctx_left(ctx, f, id_w);
    // feedback to f in the filled context equals the B-marginal of the joint feedback
    const auto joint_fb = feedback(ctx, lens_tensor(f, id_w));  // on Y⊗W
    CHECK(feedback(left, f) == marginal_left(joint_fb, y, w));

    // context for id_w ⊗ f, with f in the right slot this time
    const auto prior2 = random_rational_dist(rng, tensor(m, tensor(w, x)), true);
    const auto k2 = pushforward_continuation(
        random_rational_kernel(rng, tensor(m, tensor(w, y)), tensor(n, tensor(w, y)), true));
    const GameContext<Rat> ctx2{m, n, prior2, k2};
    const auto right = local_ctx_right(ctx2, id_w, f);
    const auto joint_fb2 = feedback(ctx2, lens_tensor(id_w, f));  // on W⊗Y
    CHECK(feedback(right, f) == marginal_right(joint_fb2, w, y));
  }
}

TEST_CASE("tensor games with product priors and factorized continuations add up") {
  SplitMix64 rng(76);
  for (int trial = 0; trial < 15; ++trial) {
    const FiniteSpace x = make_space("x", 2);
    const FiniteSpace y = make_space("y", 2);
    const FiniteSpace u = make_space("u", 2);
    const FiniteSpace v = make_space("v", 2);
    const auto f = make_autoencoder_game(exact_lens(random_float_kernel(rng, x, y)), kl_fn<double>());
    const auto g = make_bayes_inference_game(exact_lens(random_float_kernel(rng, u, v)), kl_fn<double>());

    const auto pi_f = random_float_dist(rng, x);
    const auto pi_g = random_float_dist(rng, u);
    const auto k_f = random_float_kernel(rng, y, y);
    const auto k_g = random_float_kernel(rng, v, v);

    // factorized continuation for the tensor game
    const auto joint_k = pushforward_continuation(tensor_kernels(k_f, k_g));
    const GameContext<double> joint_ctx{FiniteSpace::unit(), FiniteSpace::unit(),
                                        tensor(pi_f, pi_g), joint_k};
    const auto fg = game_tensor(f, g);
    const double joint_fitness = fg.fitness(joint_ctx);

    const double standalone =
        f.fitness(simple_context<double>(pi_f, pushforward_continuation(k_f))) +
        g.fitness(simple_context<double>(pi_g, pushforward_continuation(k_g)));
    CHECK(joint_fitness == doctest::Approx(standalone).epsilon(1e-12));
  }
}

TEST_CASE("tensor games are symmetric under swapping factors and context") {
  SplitMix64 rng(78);
  for (int trial = 0; trial < 10; ++trial) {
    const FiniteSpace x = make_space("x", 2);
    const FiniteSpace y = make_space("y", 2);
    const FiniteSpace u = make_space("u", 3);
    const FiniteSpace v = make_space("v", 2);
    const auto f = make_autoencoder_game(exact_lens(random_float_kernel(rng, x, y)), kl_fn<double>());
    const auto g = make_autoencoder_game(exact_lens(random_float_kernel(rng, u, v)), kl_fn<double>());

    // correlated prior and entangled continuation, then the swapped context
    const auto prior = random_float_dist(rng, tensor(x, u));
    const auto k = random_float_kernel(rng, tensor(y, v), tensor(y, v));
    const GameContext<double> ctx{FiniteSpace::unit(), FiniteSpace::unit(), prior,
                                  pushforward_continuation(k)};
    const auto swap_in = swap_kernel<double>(x, u);
    const auto swap_pred = swap_kernel<double>(v, y);  // predictions arrive as V⊗Y
    const auto swap_out = swap_kernel<double>(y, v);   // feedback leaves as V⊗Y
    const GameContext<double> swapped{
        FiniteSpace::unit(), FiniteSpace::unit(), pushforward(prior, swap_in),
        [k, swap_pred, swap_out](const Dist<double>& sigma) {
          return pushforward(pushforward(pushforward(sigma, swap_pred), k), swap_out);
        }};
    CHECK(game_tensor(f, g).fitness(ctx) ==
          doctest::Approx(game_tensor(g, f).fitness(swapped)).epsilon(1e-12));
  }
}

TEST_CASE("tensor with the unit game is the identity") {
  SplitMix64 rng(77);
  const FiniteSpace x = make_space("x", 2);
  const FiniteSpace y = make_space("y", 3);
  const auto game = make_autoencoder_game(exact_lens(random_float_kernel(rng, x, y)), kl_fn<double>());
  const auto unit_game = identity_game<double>(FiniteSpace::unit(), FiniteSpace::unit());
  const auto fg = game_tensor(game, unit_game);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ctx = random_simple_context(rng, x, y);
    CHECK(fg.fitness(ctx) == doctest::Approx(game.fitness(ctx)).epsilon(1e-12));
  }
}

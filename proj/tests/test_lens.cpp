#include "doctest.h"

#include "statlens/lens.hpp"

#include "support/oracles.hpp"
#include "support/test_helpers.hpp"

using namespace statlens;
using namespace statlens::testing;

TEST_CASE("the identity lens is a unit for lens composition") {
  SplitMix64 rng(40);
  const FiniteSpace x = make_space("x", 3);
  const FiniteSpace y = make_space("y", 4);
  const auto lens = exact_lens(random_rational_kernel(rng, x, y, /*positive=*/true));

  const auto left = lens_compose(identity_lens<Rat>(x), lens);
  const auto right = lens_compose(lens, identity_lens<Rat>(y));
  for (int trial = 0; trial < 5; ++trial) {
    const auto pi = random_rational_dist(rng, x, /*positive=*/true);
    CHECK(left.forward() == lens.forward());
    CHECK(right.forward() == lens.forward());
    CHECK(left.backward().at(pi) == lens.backward().at(pi));
    CHECK(right.backward().at(pi) == lens.backward().at(pi));
  }
}

TEST_CASE("exact lens of the 0.8 channel reproduces the worked posterior") {
  const FiniteSpace bit = binary_space();
  const auto lens = exact_lens(bsc<Rat>(Rat(4, 5), bit));
  const auto update = lens.backward().at(Dist<Rat>::uniform(bit));
  CHECK(update.row("1") == Dist<Rat>(bit, {Rat(1, 5), Rat(4, 5)}));

  const auto id_update = exact_lens(Kernel<Rat>::identity(bit)).backward().at(Dist<Rat>::uniform(bit));
  CHECK(id_update.row("0") == Dist<Rat>::dirac(bit, "0"));
}

TEST_CASE("Bayesian updates compose optically on random exact lenses") {
  SplitMix64 rng(41);
  int degenerate_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const FiniteSpace x = make_space("x", 1 + rng.below(6));
    const FiniteSpace y = make_space("y", 1 + rng.below(6));
    const FiniteSpace z = make_space("z", 1 + rng.below(6));
    const auto c = random_rational_kernel(rng, x, y);
    const auto d = random_rational_kernel(rng, y, z);
    const auto pi = random_rational_dist(rng, x);
    CHECK(verify_buco(c, d, pi));

    // independent cross-check by direct joint enumeration
    const auto composite = compose_kernels(c, d);
    const auto evidence = pushforward(pi, composite);
    const auto optical = lens_compose(exact_lens(c), exact_lens(d)).backward().at(pi);
    const auto table = oracle::joint_table(pi, composite);
    for (std::size_t zi = 0; zi < z.size(); ++zi) {
      const auto column = oracle::posterior_column(table, zi);
      if (column.empty()) {
        ++degenerate_seen;
        CHECK_FALSE(optical.row_defined(zi));
      } else {
        CHECK(optical.row(zi).weights() == column);
      }
    }
  }
  // the sweep must exercise zero-evidence observations too
  CHECK(degenerate_seen > 0);
}

TEST_CASE("identity channels compose optically, trivially") {
  const FiniteSpace bit = binary_space();
  const auto id = Kernel<Rat>::identity(bit);
  CHECK(verify_buco(id, id, Dist<Rat>::uniform(bit)));
}

TEST_CASE("optical inversion works when the middle prediction misses outcomes") {
  // c∘π puts no mass on y2, and d∘c∘π none on z2
  const FiniteSpace bit = binary_space();
  const FiniteSpace y = make_space("y", 3);
  const FiniteSpace z = make_space("z", 3);
  const Kernel<Rat> c(bit, y,
                      std::vector<Dist<Rat>>{Dist<Rat>(y, {Rat(1, 2), Rat(1, 2), Rat(0)}),
                                             Dist<Rat>(y, {Rat(3, 4), Rat(1, 4), Rat(0)})});
  const Kernel<Rat> d(y, z,
                      std::vector<Dist<Rat>>{Dist<Rat>(z, {Rat(1, 2), Rat(1, 2), Rat(0)}),
                                             Dist<Rat>(z, {Rat(1, 3), Rat(2, 3), Rat(0)}),
                                             Dist<Rat>(z, {Rat(0), Rat(0), Rat(1)})});
  const auto pi = Dist<Rat>::uniform(bit);
  CHECK(verify_buco(c, d, pi));
  const auto optical = lens_compose(exact_lens(c), exact_lens(d)).backward().at(pi);
  CHECK_FALSE(optical.row_defined(2));
}

TEST_CASE("lens composition is associative pointwise") {
  SplitMix64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const FiniteSpace x = make_space("x", 3);
    const FiniteSpace y = make_space("y", 4);
    const FiniteSpace z = make_space("z", 3);
    const FiniteSpace w = make_space("w", 2);
    const auto f = exact_lens(random_rational_kernel(rng, x, y, true));
    const auto g = exact_lens(random_rational_kernel(rng, y, z, true));
    const auto h = exact_lens(random_rational_kernel(rng, z, w, true));
    const auto left = lens_compose(lens_compose(f, g), h);
    const auto right = lens_compose(f, lens_compose(g, h));
    CHECK(left.forward() == right.forward());
    for (int s = 0; s < 3; ++s) {
      const auto pi = random_rational_dist(rng, x, true);
      CHECK(left.backward().at(pi) == right.backward().at(pi));
    }
  }
}

TEST_CASE("tensor of lenses updates factorwise at product states") {
  SplitMix64 rng(43);
  const FiniteSpace x = make_space("x", 2);
  const FiniteSpace xp = make_space("u", 3);
  const FiniteSpace y = make_space("y", 3);
  const FiniteSpace yp = make_space("v", 2);
  const auto cf = random_rational_kernel(rng, x, y, true);
  const auto cg = random_rational_kernel(rng, xp, yp, true);
  const auto f = exact_lens(cf);
  const auto g = exact_lens(cg);
  const auto fg = lens_tensor(f, g);

  const auto pi = random_rational_dist(rng, x, true);
  const auto rho = random_rational_dist(rng, xp, true);
  CHECK(fg.backward().at(tensor(pi, rho)) ==
        tensor_kernels(f.backward().at(pi), g.backward().at(rho)));

  // unit lens is a unit for tensor (up to the elided unitor)
  const auto unit = identity_lens<Rat>(FiniteSpace::unit());
  const auto fu = lens_tensor(f, unit);
  CHECK(fu.forward() == f.forward());
  CHECK(fu.backward().at(pi) == f.backward().at(pi));
}

TEST_CASE("tensor-then-invert differs from invert-then-tensor at a correlated prior") {
  // measured counterexample, kept as a regression anchor: for the perfectly
  // correlated state on bit⊗bit, inverting c⊗c is not the tensor of the
  // marginal inversions
  const FiniteSpace bit = binary_space();
  const auto c = bsc<Rat>(Rat(4, 5), bit);
  const FiniteSpace pair = tensor(bit, bit);
  const Dist<Rat> correlated(pair, {Rat(1, 2), Rat(0), Rat(0), Rat(1, 2)});

  const auto joint_inversion = invert(tensor_kernels(c, c), correlated).posterior;
  const auto tensored = lens_tensor(exact_lens(c), exact_lens(c)).backward().at(correlated);
  CHECK_FALSE(almost_equal(joint_inversion, tensored,
                           pushforward(correlated, tensor_kernels(c, c))));
}

TEST_CASE("reindexing acts contravariantly by pullback") {
  SplitMix64 rng(44);
  const FiniteSpace x = make_space("x", 3);
  const FiniteSpace y = make_space("y", 4);
  const FiniteSpace z = make_space("z", 2);
  const auto base_kernel = random_rational_kernel(rng, x, make_space("a", 2), true);
  const auto alpha = exact_lens(base_kernel).backward();

  // identity is neutral
  const auto same = reindex(Kernel<Rat>::identity(x), alpha);
  const auto sigma = random_rational_dist(rng, x, true);
  CHECK(same.at(sigma) == alpha.at(sigma));

  // contravariant functoriality, evaluated at sampled states
  const auto f = random_rational_kernel(rng, y, x, true);
  const auto g = random_rational_kernel(rng, z, y, true);
  const auto once = reindex(compose_kernels(g, f), alpha);
  const auto twice = reindex(g, reindex(f, alpha));
  for (int s = 0; s < 5; ++s) {
    const auto state = random_rational_dist(rng, z, true);
    CHECK(once.at(state) == twice.at(state));
  }

  // constant rules are fixed by reindexing
  const auto constant = StateDependentKernel<Rat>::constant(x, Kernel<Rat>::identity(z));
  const auto pulled = reindex(f, constant);
  const auto tau = random_rational_dist(rng, y, true);
  CHECK(pulled.at(tau) == Kernel<Rat>::identity(z));
}

TEST_CASE("lens composition and tensor interact by interchange at product states") {
  SplitMix64 rng(45);
  const FiniteSpace x = make_space("x", 2);
  const FiniteSpace y = make_space("y", 2);
  const FiniteSpace z = make_space("z", 2);
  const FiniteSpace u = make_space("u", 2);
  const FiniteSpace v = make_space("v", 2);
  const FiniteSpace w = make_space("w", 2);
  const auto f = exact_lens(random_rational_kernel(rng, x, y, true));
  const auto g = exact_lens(random_rational_kernel(rng, y, z, true));
  const auto fp = exact_lens(random_rational_kernel(rng, u, v, true));
  const auto gp = exact_lens(random_rational_kernel(rng, v, w, true));

  const auto compose_then_tensor = lens_tensor(lens_compose(f, g), lens_compose(fp, gp));
  const auto tensor_then_compose = lens_compose(lens_tensor(f, fp), lens_tensor(g, gp));
  CHECK(compose_then_tensor.forward() == tensor_then_compose.forward());
  for (int s = 0; s < 5; ++s) {
    const auto pi = tensor(random_rational_dist(rng, x, true), random_rational_dist(rng, u, true));
    CHECK(compose_then_tensor.backward().at(pi) == tensor_then_compose.backward().at(pi));
  }
}

TEST_CASE("backward evaluation rejects states on the wrong space") {
  const FiniteSpace bit = binary_space();
  const auto lens = exact_lens(bsc<Rat>(Rat(4, 5), bit));
  CHECK_THROWS_AS(lens.backward().at(Dist<Rat>::uniform(make_space("y", 3))), SpaceMismatch);
}

#pragma once

#include <functional>
#include <limits>

#include "statlens/para.hpp"

namespace statlens {

// The environment's response: takes the joint prediction (residual alongside
// the forwards output) and returns the joint observation fed back to the
// update channel.
template <typename R>
using Continuation = std::function<Dist<R>(const Dist<R>&)>;

// A complex context for a lens (X,A) ↬ (Y,B), by chosen representative:
// residual pair (M,N), a prior on M⊗X, and a continuation
// Dist(M⊗Y) → Dist(N⊗B). Simple contexts are the M = N = I case. The coend
// equivalence of representatives is not decided; all operations act on
// representatives.
template <typename R>
struct GameContext {
  FiniteSpace residual_fwd;   // M
  FiniteSpace residual_bwd;   // N
  Dist<R> prior;              // on M⊗X
  Continuation<R> continuation;
};

template <typename R>
GameContext<R> simple_context(Dist<R> prior, Continuation<R> k) {
  return GameContext<R>{FiniteSpace::unit(), FiniteSpace::unit(), std::move(prior), std::move(k)};
}

template <typename R>
using FitnessFn = std::function<double(const GameContext<R>&)>;

template <typename R>
using DivergenceFn = std::function<double(const Dist<R>&, const Dist<R>&)>;

// A statistical game: a lens paired with a contextual fitness function,
// valued in the monoid (ℝ ∪ {±∞}, +, 0).
template <typename R>
struct StatGame {
  BayesianLens<R> lens;
  FitnessFn<R> fitness;
};

// The prior seen by the lens itself: the X-marginal of the context prior.
template <typename R>
Dist<R> prior_base(const GameContext<R>& ctx, const BayesianLens<R>& lens) {
  if (ctx.prior.space() != tensor(ctx.residual_fwd, lens.dom())) {
    throw SpaceMismatch("context prior on " + ctx.prior.space().label() + ", lens expects " +
                        tensor(ctx.residual_fwd, lens.dom()).label());
  }
  return marginal_right(ctx.prior, ctx.residual_fwd, lens.dom());
}

// The environment's feedback in B to the lens: run the prediction through
// the continuation and marginalize onto the observation component.
template <typename R>
Dist<R> feedback(const GameContext<R>& ctx, const BayesianLens<R>& lens) {
  if (ctx.prior.space() != tensor(ctx.residual_fwd, lens.dom())) {
    throw SpaceMismatch("context prior on " + ctx.prior.space().label() + ", lens expects " +
                        tensor(ctx.residual_fwd, lens.dom()).label());
  }
  Dist<R> prediction = pushforward(
      ctx.prior, tensor_kernels(Kernel<R>::identity(ctx.residual_fwd), lens.forward()));
  Dist<R> out = ctx.continuation(prediction);
  if (out.space() != tensor(ctx.residual_bwd, lens.bwd_dom())) {
    throw SpaceMismatch("continuation returned a state on " + out.space().label() +
                        ", expected " + tensor(ctx.residual_bwd, lens.bwd_dom()).label());
  }
  return marginal_right(out, ctx.residual_bwd, lens.bwd_dom());
}

// 1-local context for the first factor of g∘f: keep the prior, precompose
// the residual-extended g into the continuation (g* in the profunctor
// action). The update side of g enters through its backward channel at the
// Y-marginal of the prediction.
template <typename R>
GameContext<R> local_ctx_seq_first(const GameContext<R>& ctx, const BayesianLens<R>& g) {
  const FiniteSpace m = ctx.residual_fwd;
  const FiniteSpace n = ctx.residual_bwd;
  const FiniteSpace y = g.dom();
  const Kernel<R> id_m = Kernel<R>::identity(m);
  const Kernel<R> id_n = Kernel<R>::identity(n);
  const Kernel<R> g_fwd = g.forward();
  const StateDependentKernel<R> g_bwd = g.backward();
  const Continuation<R> k = ctx.continuation;
  Continuation<R> wrapped = [m, y, id_m, id_n, g_fwd, g_bwd, k](const Dist<R>& sigma) {
    Dist<R> pushed = pushforward(sigma, tensor_kernels(id_m, g_fwd));
    Dist<R> fb = k(pushed);
    Kernel<R> update = g_bwd.at(marginal_right(sigma, m, y));
    return pushforward(fb, tensor_kernels(id_n, update));
  };
  return GameContext<R>{m, n, ctx.prior, std::move(wrapped)};
}

// 1-local context for the second factor of g∘f: push the prior through the
// residual-extended f, keep the continuation (f_* in the profunctor action).
template <typename R>
GameContext<R> local_ctx_seq_second(const GameContext<R>& ctx, const BayesianLens<R>& f) {
  Dist<R> pushed = pushforward(
      ctx.prior, tensor_kernels(Kernel<R>::identity(ctx.residual_fwd), f.forward()));
  return GameContext<R>{ctx.residual_fwd, ctx.residual_bwd, std::move(pushed), ctx.continuation};
}

// 2-local contexts for a parallel pair f ⊗ f'. Filling one hole extends the
// residual by the filler's codomain pair: the left context (for f) swaps the
// factors first, the right context (for f') does not.
template <typename R>
GameContext<R> local_ctx_left(const GameContext<R>& ctx, const BayesianLens<R>& f,
                              const BayesianLens<R>& filler) {
  const FiniteSpace m = ctx.residual_fwd;
  const FiniteSpace n = ctx.residual_bwd;
  if (ctx.prior.space() != tensor(m, tensor(f.dom(), filler.dom()))) {
    throw SpaceMismatch("tensor context prior on " + ctx.prior.space().label());
  }
  // Prior: swap X,X', push X' through the filler's forward channel.
  Kernel<R> swap_in = factor_permutation_kernel<R>({m, f.dom(), filler.dom()}, {0, 2, 1});
  Kernel<R> fill = tensor_kernels(
      tensor_kernels(Kernel<R>::identity(m), filler.forward()), Kernel<R>::identity(f.dom()));
  Dist<R> prior = pushforward(pushforward(ctx.prior, swap_in), fill);

  Kernel<R> swap_pred =
      factor_permutation_kernel<R>({m, filler.cod(), f.cod()}, {0, 2, 1});
  Kernel<R> swap_fb =
      factor_permutation_kernel<R>({n, f.bwd_dom(), filler.bwd_dom()}, {0, 2, 1});
  const Continuation<R> k = ctx.continuation;
  Continuation<R> wrapped = [k, swap_pred, swap_fb](const Dist<R>& sigma) {
    return pushforward(k(pushforward(sigma, swap_pred)), swap_fb);
  };
  return GameContext<R>{tensor(m, filler.cod()), tensor(n, filler.bwd_dom()), std::move(prior),
                        std::move(wrapped)};
}

template <typename R>
GameContext<R> local_ctx_right(const GameContext<R>& ctx, const BayesianLens<R>& filler,
                               const BayesianLens<R>& g) {
  const FiniteSpace m = ctx.residual_fwd;
  const FiniteSpace n = ctx.residual_bwd;
  if (ctx.prior.space() != tensor(m, tensor(filler.dom(), g.dom()))) {
    throw SpaceMismatch("tensor context prior on " + ctx.prior.space().label());
  }
  Kernel<R> fill = tensor_kernels(
      tensor_kernels(Kernel<R>::identity(m), filler.forward()), Kernel<R>::identity(g.dom()));
  Dist<R> prior = pushforward(ctx.prior, fill);
  return GameContext<R>{tensor(m, filler.cod()), tensor(n, filler.bwd_dom()), std::move(prior),
                        ctx.continuation};
}

// The identity game (id, 0).
template <typename R>
StatGame<R> identity_game(const FiniteSpace& x, const FiniteSpace& a) {
  return StatGame<R>{identity_lens<R>(x, a), [](const GameContext<R>&) { return 0.0; }};
}

// Sequential composition: compose the lenses, sum the local fitnesses.
template <typename R>
StatGame<R> game_compose(const StatGame<R>& f, const StatGame<R>& g) {
  BayesianLens<R> lens = lens_compose(f.lens, g.lens);
  const BayesianLens<R> f_lens = f.lens;
  const BayesianLens<R> g_lens = g.lens;
  const FitnessFn<R> phi = f.fitness;
  const FitnessFn<R> psi = g.fitness;
  FitnessFn<R> fitness = [f_lens, g_lens, phi, psi](const GameContext<R>& ctx) {
    return phi(local_ctx_seq_first(ctx, g_lens)) + psi(local_ctx_seq_second(ctx, f_lens));
  };
  return StatGame<R>{std::move(lens), std::move(fitness)};
}

// Parallel composition: tensor the lenses, sum the 2-local fitnesses.
// Local fitnesses are computed independently; correlated residuals may be
// double-counted.
template <typename R>
StatGame<R> game_tensor(const StatGame<R>& f, const StatGame<R>& g) {
  BayesianLens<R> lens = lens_tensor(f.lens, g.lens);
  const BayesianLens<R> f_lens = f.lens;
  const BayesianLens<R> g_lens = g.lens;
  const FitnessFn<R> phi = f.fitness;
  const FitnessFn<R> psi = g.fitness;
  FitnessFn<R> fitness = [f_lens, g_lens, phi, psi](const GameContext<R>& ctx) {
    return phi(local_ctx_left(ctx, f_lens, g_lens)) + psi(local_ctx_right(ctx, f_lens, g_lens));
  };
  return StatGame<R>{std::move(lens), std::move(fitness)};
}

// ---------------------------------------------------------------------------
// Builtin continuations. Arbitrary continuations are opaque functions; these
// named ones form the serializable registry used by CLI scenarios.

// Feedback is the prediction itself (requires N⊗B = M⊗Y).
template <typename R>
Continuation<R> identity_continuation() {
  return [](const Dist<R>& sigma) { return sigma; };
}

// Feedback is a fixed state regardless of the prediction. With empirical
// weights this is the replay of an observed dataset.
template <typename R>
Continuation<R> constant_continuation(Dist<R> state) {
  return [state = std::move(state)](const Dist<R>&) { return state; };
}

// Feedback is the prediction pushed through a fixed channel M⊗Y ⇸ N⊗B.
template <typename R>
Continuation<R> pushforward_continuation(Kernel<R> k) {
  return [k = std::move(k)](const Dist<R>& sigma) { return pushforward(sigma, k); };
}

// Feedback permutes the outcome labels of the prediction (M = N).
template <typename R>
Continuation<R> permutation_continuation(const FiniteSpace& residual, const FiniteSpace& y,
                                         const std::vector<std::size_t>& permutation) {
  if (permutation.size() != y.size()) {
    throw InvalidValue("label permutation has the wrong length");
  }
  Kernel<R> perm = Kernel<R>::deterministic(y, y, [permutation](std::size_t i) {
    return permutation.at(i);
  });
  return pushforward_continuation(tensor_kernels(Kernel<R>::identity(residual), std::move(perm)));
}

// Feedback resamples the prediction marginal: observations are distributed
// as the evidence c∘π (N = I, B = Y).
template <typename R>
Continuation<R> evidence_continuation(const FiniteSpace& residual, const FiniteSpace& y) {
  return [residual, y](const Dist<R>& sigma) { return marginal_right(sigma, residual, y); };
}

// ---------------------------------------------------------------------------
// Divergences and fitness functions from the examples gallery.

template <typename R>
DivergenceFn<R> kl_fn() {
  return [](const Dist<R>& a, const Dist<R>& b) { return kl_divergence(a, b); };
}

template <typename R>
DivergenceFn<R> tv_fn() {
  return [](const Dist<R>& a, const Dist<R>& b) { return tv_distance(a, b); };
}

// The lens of a maximum likelihood game: a state π as a lens (I,I) ↬ (X,X)
// whose update channel just discards the observation.
template <typename R>
BayesianLens<R> state_lens(const Dist<R>& pi) {
  return BayesianLens<R>(
      Kernel<R>::from_state(pi),
      StateDependentKernel<R>::constant(FiniteSpace::unit(), discard_kernel<R>(pi.space())));
}

// Maximum f-likelihood fitness: φ(ctx) = E_{efb}[f ∘ p_π]. With f = log and
// feedback mass outside support(π), the fitness is −∞.
template <typename R>
FitnessFn<R> mle_fitness(const Dist<R>& pi, std::function<double(double)> f) {
  const BayesianLens<R> lens = state_lens(pi);
  return [pi, lens, f](const GameContext<R>& ctx) {
    const Dist<R> efb = feedback(ctx, lens);
    double total = 0.0;
    for (std::size_t x = 0; x < efb.size(); ++x) {
      const double w = num_traits<R>::to_double(efb.weights()[x]);
      if (w == 0.0) continue;
      total += w * f(num_traits<R>::to_double(pi.weights()[x]));
    }
    return total;
  };
}

template <typename R>
StatGame<R> make_mle_game(const Dist<R>& pi, std::function<double(double)> f) {
  return StatGame<R>{state_lens(pi), mle_fitness(pi, std::move(f))};
}

// Parameterized maximum f-likelihood fitness for a lens
// (I,I) →^{(Ω,Θ)} (X,X): φ(π,k) = E_{efb}[f ∘ p_{l∘π_Ω}], with π_Ω the
// parameter marginal of the context prior.
template <typename R>
FitnessFn<R> param_mle_fitness(const ParamLens<R>& l, std::function<double(double)> f) {
  if (!l.dom().is_unit() || !l.bwd_cod().is_unit()) {
    throw SpaceMismatch("param_mle_fitness expects a parameterized state (domain pair (I,I))");
  }
  const BayesianLens<R> lens = l.lens();
  return [lens, f](const GameContext<R>& ctx) {
    const Dist<R> efb = feedback(ctx, lens);
    const Dist<R> pi_omega = prior_base(ctx, lens);
    const Dist<R> predicted = pushforward(pi_omega, lens.forward());
    double total = 0.0;
    for (std::size_t x = 0; x < efb.size(); ++x) {
      const double w = num_traits<R>::to_double(efb.weights()[x]);
      if (w == 0.0) continue;
      total += w * f(num_traits<R>::to_double(predicted.weights()[x]));
    }
    return total;
  };
}

template <typename R>
StatGame<R> make_param_mle_game(const ParamLens<R>& l, std::function<double(double)> f) {
  return StatGame<R>{l.lens(), param_mle_fitness(l, std::move(f))};
}

// D-Bayesian inference fitness: expected divergence between the lens's own
// posterior and the exact one, over the feedback observations. Feedback mass
// at zero-evidence observations surfaces as UnsupportedObservation.
template <typename R>
FitnessFn<R> bayes_inference_fitness(const BayesianLens<R>& lens, DivergenceFn<R> divergence) {
  return [lens, divergence](const GameContext<R>& ctx) {
    const Dist<R> pi = prior_base(ctx, lens);
    const Dist<R> efb = feedback(ctx, lens);
    const Kernel<R> approx = lens.backward().at(pi);
    const Kernel<R> exact = invert(lens.forward(), pi).posterior;
    double total = 0.0;
    for (std::size_t y = 0; y < efb.size(); ++y) {
      const double w = num_traits<R>::to_double(efb.weights()[y]);
      if (w == 0.0) continue;
      total += w * divergence(approx.row(y), exact.row(y));
    }
    return total;
  };
}

template <typename R>
StatGame<R> make_bayes_inference_game(const BayesianLens<R>& lens, DivergenceFn<R> divergence) {
  return StatGame<R>{lens, bayes_inference_fitness(lens, std::move(divergence))};
}

// D-free energy of an approximate posterior q for the generative model
// (π, c) at observation y: E_{x∼q}[−log p_c(y|x)] + D(q, π). The energy term
// contributes +∞ where q puts mass on zero conditional density.
template <typename R>
double free_energy(const Dist<R>& q, const Kernel<R>& c, const Dist<R>& pi, std::size_t y,
                   const DivergenceFn<R>& divergence) {
  if (q.space() != c.dom() || pi.space() != c.dom()) {
    throw SpaceMismatch("free_energy: q and π must live on the channel domain");
  }
  if (y >= c.cod().size()) {
    throw UnknownOutcome("free_energy: observation index out of range");
  }
  double energy = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) {
    const double qx = num_traits<R>::to_double(q.weights()[x]);
    if (qx == 0.0) continue;
    const double lik = num_traits<R>::to_double(c.row(x).weights()[y]);
    if (lik == 0.0) return std::numeric_limits<double>::infinity();
    energy -= qx * std::log(lik);
  }
  return energy + divergence(q, pi);
}

template <typename R>
double free_energy(const Dist<R>& q, const Kernel<R>& c, const Dist<R>& pi, std::string_view y,
                   const DivergenceFn<R>& divergence) {
  return free_energy(q, c, pi, c.cod().index_of(y), divergence);
}

// The evidence-upper-bound identity F = D_KL[q, c†_π(y)] − log p_{c∘π}(y),
// with the two sides computed along independent routes.
struct EuboReport {
  double free_energy = 0.0;       // E_q[−log p_c] + KL(q, π)
  double kl_to_exact = 0.0;       // D_KL[q, exact posterior at y]
  double neg_log_evidence = 0.0;  // −log p_{c∘π}(y)
  double identity_gap = 0.0;      // |F − (KL + NLE)|, 0 if both sides infinite
  bool holds = false;
};

template <typename R>
EuboReport check_eubo(const Dist<R>& q, const Kernel<R>& c, const Dist<R>& pi, std::size_t y,
                      double tol) {
  const InversionResult<R> inv = invert(c, pi);
  if (!inv.posterior.row_defined(y)) {
    throw UnsupportedObservation("check_eubo: observation \"" + c.cod().outcome(y) +
                                 "\" has zero evidence");
  }
  EuboReport report;
  report.free_energy = free_energy(q, c, pi, y, kl_fn<R>());
  report.kl_to_exact = kl_divergence(q, inv.posterior.row(y));
  report.neg_log_evidence = -std::log(num_traits<R>::to_double(inv.evidence.weights()[y]));
  const double rhs = report.kl_to_exact + report.neg_log_evidence;
  const bool both_inf = std::isinf(report.free_energy) && std::isinf(rhs) &&
                        report.free_energy > 0 && rhs > 0;
  report.identity_gap = both_inf ? 0.0 : std::abs(report.free_energy - rhs);
  report.holds =
      report.identity_gap <= tol && report.free_energy >= report.neg_log_evidence - tol;
  return report;
}

// Helmholtz split F = U − S (temperature 1): internal energy under q of the
// generative model, minus the Shannon entropy of q.
struct HelmholtzReport {
  double internal_energy = 0.0;  // E_{x∼q}[−log p_c(y|x) − log p_π(x)]
  double entropy = 0.0;          // S[q]
};

template <typename R>
HelmholtzReport helmholtz_decomposition(const Dist<R>& q, const Kernel<R>& c,
                                        const Dist<R>& pi, std::size_t y) {
  if (q.space() != c.dom() || pi.space() != c.dom()) {
    throw SpaceMismatch("helmholtz_decomposition: q and π must live on the channel domain");
  }
  HelmholtzReport report;
  for (std::size_t x = 0; x < q.size(); ++x) {
    const double qx = num_traits<R>::to_double(q.weights()[x]);
    if (qx == 0.0) continue;
    const double lik = num_traits<R>::to_double(c.row(x).weights()[y]);
    const double px = num_traits<R>::to_double(pi.weights()[x]);
    if (lik == 0.0 || px == 0.0) {
      report.internal_energy = std::numeric_limits<double>::infinity();
      break;
    }
    report.internal_energy -= qx * (std::log(lik) + std::log(px));
  }
  report.entropy = shannon_entropy(q);
  return report;
}

// Simple D-autoencoder fitness: expected free energy over the feedback, with
// the lens's own update channel as the approximate posterior.
template <typename R>
FitnessFn<R> autoencoder_fitness(const BayesianLens<R>& lens, DivergenceFn<R> divergence) {
  return [lens, divergence](const GameContext<R>& ctx) {
    const Dist<R> pi = prior_base(ctx, lens);
    const Dist<R> efb = feedback(ctx, lens);
    const Kernel<R> approx = lens.backward().at(pi);
    double total = 0.0;
    for (std::size_t y = 0; y < efb.size(); ++y) {
      const double w = num_traits<R>::to_double(efb.weights()[y]);
      if (w == 0.0) continue;
      total += w * free_energy(approx.row(y), lens.forward(), pi, y, divergence);
    }
    return total;
  };
}

template <typename R>
StatGame<R> make_autoencoder_game(const BayesianLens<R>& lens, DivergenceFn<R> divergence) {
  return StatGame<R>{lens, autoencoder_fitness(lens, std::move(divergence))};
}

// Generalized (l,D)-Bayesian inference fitness:
// E_{y∼efb}[ E_{x∼q_y}[l(y,x)] + D(q_y, π) ] for a loss effect l on Y⊗X.
template <typename R>
FitnessFn<R> generalized_bayes_fitness(const BayesianLens<R>& lens, const Effect<double>& loss,
                                       DivergenceFn<R> divergence) {
  if (loss.space() != tensor(lens.cod(), lens.dom())) {
    throw SpaceMismatch("generalized_bayes_fitness: loss effect must live on Y⊗X");
  }
  return [lens, loss, divergence](const GameContext<R>& ctx) {
    const Dist<R> pi = prior_base(ctx, lens);
    const Dist<R> efb = feedback(ctx, lens);
    const Kernel<R> approx = lens.backward().at(pi);
    const std::size_t nx = lens.dom().size();
    double total = 0.0;
    for (std::size_t y = 0; y < efb.size(); ++y) {
      const double w = num_traits<R>::to_double(efb.weights()[y]);
      if (w == 0.0) continue;
      const Dist<R>& qy = approx.row(y);
      double inner = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        const double qx = num_traits<R>::to_double(qy.weights()[x]);
        if (qx == 0.0) continue;
        inner += qx * loss.values()[pair_index(y, x, nx)];
      }
      total += w * (inner + divergence(qy, pi));
    }
    return total;
  };
}

template <typename R>
StatGame<R> make_genbayes_game(const BayesianLens<R>& lens, const Effect<double>& loss,
                               DivergenceFn<R> divergence) {
  return StatGame<R>{lens, generalized_bayes_fitness(lens, loss, std::move(divergence))};
}

// The loss l = −log p_c on Y⊗X, defined for strictly positive channels
// (effects are capped at finite values).
template <typename R>
Effect<double> neg_log_density_effect(const Kernel<R>& c) {
  const std::size_t nx = c.dom().size();
  const std::size_t ny = c.cod().size();
  std::vector<double> v(nx * ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double lik = num_traits<R>::to_double(c.row(x).weights()[y]);
      if (lik == 0.0) {
        throw InvalidValue("neg_log_density_effect: channel has a zero entry; the induced "
                           "effect would be infinite");
      }
      v[pair_index(y, x, nx)] = -std::log(lik);
    }
  }
  return Effect<double>(tensor(c.cod(), c.dom()), std::move(v));
}

}  // namespace statlens

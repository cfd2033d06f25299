#pragma once

#include <functional>
#include <utility>

#include "statlens/inversion.hpp"

namespace statlens {

// A state-dependent channel B ⇸_X A: for each prior state on the base X, a
// kernel B ⇸ A. The rule is an opaque pure function (the index set of states
// is infinite even for finite X), so equality of state-dependent kernels is
// only ever checked pointwise at sampled states.
template <typename R>
class StateDependentKernel {
 public:
  using Rule = std::function<Kernel<R>(const Dist<R>&)>;

  StateDependentKernel(FiniteSpace base, FiniteSpace dom, FiniteSpace cod, Rule rule)
      : base_(std::move(base)), dom_(std::move(dom)), cod_(std::move(cod)),
        rule_(std::move(rule)) {}

  // Rule that ignores the state.
  static StateDependentKernel constant(FiniteSpace base, const Kernel<R>& k) {
    return StateDependentKernel(std::move(base), k.dom(), k.cod(),
                                [k](const Dist<R>&) { return k; });
  }

  const FiniteSpace& base() const { return base_; }
  const FiniteSpace& dom() const { return dom_; }
  const FiniteSpace& cod() const { return cod_; }

  Kernel<R> at(const Dist<R>& state) const {
    if (state.space() != base_) {
      throw SpaceMismatch("state-dependent kernel indexed by " + base_.label() +
                          ", evaluated at state on " + state.space().label());
    }
    Kernel<R> k = rule_(state);
    if (k.dom() != dom_ || k.cod() != cod_) {
      throw SpaceMismatch("state-dependent kernel rule returned " + k.dom().label() + " ⇸ " +
                          k.cod().label() + ", declared " + dom_.label() + " ⇸ " + cod_.label());
    }
    return k;
  }

 private:
  FiniteSpace base_;
  FiniteSpace dom_;
  FiniteSpace cod_;
  Rule rule_;
};

// A Bayesian lens (X,A) ↬ (Y,B): a forwards (prediction) channel X ⇸ Y and a
// backwards (update) channel B ⇸_X A indexed by states on X.
template <typename R>
class BayesianLens {
 public:
  BayesianLens(Kernel<R> forward, StateDependentKernel<R> backward)
      : forward_(std::move(forward)), backward_(std::move(backward)) {
    if (backward_.base() != forward_.dom()) {
      throw SpaceMismatch("lens backward indexed by " + backward_.base().label() +
                          ", forward domain is " + forward_.dom().label());
    }
  }

  const Kernel<R>& forward() const { return forward_; }
  const StateDependentKernel<R>& backward() const { return backward_; }

  // Signature ((X,A),(Y,B)).
  const FiniteSpace& dom() const { return forward_.dom(); }        // X
  const FiniteSpace& cod() const { return forward_.cod(); }        // Y
  const FiniteSpace& bwd_dom() const { return backward_.dom(); }   // B
  const FiniteSpace& bwd_cod() const { return backward_.cod(); }   // A

 private:
  Kernel<R> forward_;
  StateDependentKernel<R> backward_;
};

// The identity lens (id_X, constant id_A) on (X, A).
template <typename R>
BayesianLens<R> identity_lens(const FiniteSpace& x, const FiniteSpace& a) {
  return BayesianLens<R>(Kernel<R>::identity(x),
                         StateDependentKernel<R>::constant(x, Kernel<R>::identity(a)));
}

template <typename R>
BayesianLens<R> identity_lens(const FiniteSpace& x) {
  return identity_lens<R>(x, x);
}

// Sequential composite: forwards compose covariantly, backwards contravariantly
// with the second factor evaluated at the pushed-forward state:
// (g ∘ f).backward at π = f.backward(π) ∘ g.backward(f∘π).
template <typename R>
BayesianLens<R> lens_compose(const BayesianLens<R>& f, const BayesianLens<R>& g) {
  if (g.dom() != f.cod()) {
    throw SpaceMismatch("lens_compose: forward channels do not chain");
  }
  if (g.bwd_cod() != f.bwd_dom()) {
    throw SpaceMismatch("lens_compose: backward channels do not chain");
  }
  Kernel<R> fwd = compose_kernels(f.forward(), g.forward());
  Kernel<R> f_fwd = f.forward();
  StateDependentKernel<R> f_bwd = f.backward();
  StateDependentKernel<R> g_bwd = g.backward();
  auto rule = [f_fwd, f_bwd, g_bwd](const Dist<R>& pi) {
    return compose_kernels(g_bwd.at(pushforward(pi, f_fwd)), f_bwd.at(pi));
  };
  return BayesianLens<R>(
      std::move(fwd),
      StateDependentKernel<R>(f.dom(), g.bwd_dom(), f.bwd_cod(), std::move(rule)));
}

// Parallel composite: backwards evaluate at the marginals of the joint state.
template <typename R>
BayesianLens<R> lens_tensor(const BayesianLens<R>& f, const BayesianLens<R>& g) {
  Kernel<R> fwd = tensor_kernels(f.forward(), g.forward());
  const FiniteSpace xf = f.dom();
  const FiniteSpace xg = g.dom();
  StateDependentKernel<R> f_bwd = f.backward();
  StateDependentKernel<R> g_bwd = g.backward();
  auto rule = [xf, xg, f_bwd, g_bwd](const Dist<R>& omega) {
    return tensor_kernels(f_bwd.at(marginal_left(omega, xf, xg)),
                          g_bwd.at(marginal_right(omega, xf, xg)));
  };
  return BayesianLens<R>(
      std::move(fwd),
      StateDependentKernel<R>(tensor(xf, xg), tensor(f.bwd_dom(), g.bwd_dom()),
                              tensor(f.bwd_cod(), g.bwd_cod()), std::move(rule)));
}

// The exact lens (c, c†): backwards is the exact Bayesian inversion of c at
// the given prior. Off the evidence support the returned kernel carries
// undefined rows.
template <typename R>
BayesianLens<R> exact_lens(const Kernel<R>& c) {
  Kernel<R> fwd = c;
  auto rule = [c](const Dist<R>& pi) { return invert(c, pi).posterior; };
  return BayesianLens<R>(
      std::move(fwd),
      StateDependentKernel<R>(c.dom(), c.cod(), c.dom(), std::move(rule)));
}

// Reindexing along f : Y ⇸ X pulls an X-indexed family back to a Y-indexed
// one: (f*α)(σ) = α(f∘σ).
template <typename R>
StateDependentKernel<R> reindex(const Kernel<R>& f, const StateDependentKernel<R>& alpha) {
  if (f.cod() != alpha.base()) {
    throw SpaceMismatch("reindex: kernel codomain " + f.cod().label() +
                        " does not match index base " + alpha.base().label());
  }
  return StateDependentKernel<R>(
      f.dom(), alpha.dom(), alpha.cod(),
      [f, alpha](const Dist<R>& sigma) { return alpha.at(pushforward(sigma, f)); });
}

// Bayesian updates compose optically: the inversion of d∘c at π and the lens
// composite c†_π ∘ d†_{c∘π} are (d∘c∘π)-almost-equal.
template <typename R>
bool verify_buco(const Kernel<R>& c, const Kernel<R>& d, const Dist<R>& pi, double tol = 0.0) {
  if (c.cod() != d.dom()) {
    throw SpaceMismatch("verify_buco: kernels do not chain");
  }
  if (c.dom() != pi.space()) {
    throw SpaceMismatch("verify_buco: prior on " + pi.space().label());
  }
  const Kernel<R> composite = compose_kernels(c, d);
  const Kernel<R> direct = invert(composite, pi).posterior;
  const BayesianLens<R> lens = lens_compose(exact_lens(c), exact_lens(d));
  const Kernel<R> optical = lens.backward().at(pi);
  return almost_equal(direct, optical, pushforward(pi, composite), tol);
}

}  // namespace statlens

#pragma once

#include "statlens/lens.hpp"

namespace statlens {

// A parameterized Bayesian lens (X,A) →^{(Ω,Θ)} (Y,B): a lens
// (Ω⊗X, Θ⊗A) ↬ (Y,B) together with the declared parameter spaces. The
// unparameterized domain pair (X,A) is recorded explicitly because product
// spaces flatten and cannot be split after the fact.
template <typename R>
class ParamLens {
 public:
  ParamLens(FiniteSpace param_fwd, FiniteSpace param_bwd, FiniteSpace dom, FiniteSpace bwd_cod,
            BayesianLens<R> lens)
      : omega_(std::move(param_fwd)), theta_(std::move(param_bwd)), dom_(std::move(dom)),
        bwd_cod_(std::move(bwd_cod)), lens_(std::move(lens)) {
    if (lens_.dom() != tensor(omega_, dom_)) {
      throw SpaceMismatch("parameterized lens domain is " + lens_.dom().label() + ", expected " +
                          tensor(omega_, dom_).label());
    }
    if (lens_.bwd_cod() != tensor(theta_, bwd_cod_)) {
      throw SpaceMismatch("parameterized lens update codomain is " + lens_.bwd_cod().label() +
                          ", expected " + tensor(theta_, bwd_cod_).label());
    }
  }

  // Trivial parameterization (Ω = Θ = I) of a plain lens.
  static ParamLens trivial(const BayesianLens<R>& lens) {
    return ParamLens(FiniteSpace::unit(), FiniteSpace::unit(), lens.dom(), lens.bwd_cod(), lens);
  }

  const FiniteSpace& omega() const { return omega_; }      // forward parameters
  const FiniteSpace& theta() const { return theta_; }      // updated parameters
  const FiniteSpace& dom() const { return dom_; }          // X
  const FiniteSpace& cod() const { return lens_.cod(); }   // Y
  const FiniteSpace& bwd_dom() const { return lens_.bwd_dom(); }  // B
  const FiniteSpace& bwd_cod() const { return bwd_cod_; }  // A
  const BayesianLens<R>& lens() const { return lens_; }

 private:
  FiniteSpace omega_;
  FiniteSpace theta_;
  FiniteSpace dom_;
  FiniteSpace bwd_cod_;
  BayesianLens<R> lens_;
};

// The lens (ω, ⋎) : (I,I) ↬ (Ω,Θ) that picks the parameter ω and discards
// updated parameters.
template <typename R>
BayesianLens<R> point_lens(const FiniteSpace& omega, const FiniteSpace& theta,
                           std::string_view point) {
  return BayesianLens<R>(
      Kernel<R>::from_state(Dist<R>::dirac(omega, point)),
      StateDependentKernel<R>::constant(FiniteSpace::unit(), discard_kernel<R>(theta)));
}

// Sequential composition with parameter accumulation: the composite of
// (X,A) →^{(Ω,Θ)} (Y,B) and (Y,B) →^{(Ω',Θ')} (Z,C) has parameters
// (Ω'⊗Ω, Θ'⊗Θ) and is g ∘ (id_{(Ω',Θ')} ⊗ f).
template <typename R>
ParamLens<R> para_compose(const ParamLens<R>& f, const ParamLens<R>& g) {
  if (g.dom() != f.cod() || g.bwd_cod() != f.bwd_dom()) {
    throw SpaceMismatch("para_compose: lenses do not chain on (Y,B)");
  }
  BayesianLens<R> widened =
      lens_tensor(identity_lens<R>(g.omega(), g.theta()), f.lens());
  BayesianLens<R> composite = lens_compose(widened, g.lens());
  return ParamLens<R>(tensor(g.omega(), f.omega()), tensor(g.theta(), f.theta()), f.dom(),
                      f.bwd_cod(), std::move(composite));
}

// Parallel composition: tensor after the interchanger relabeling
// Ω⊗Ω'⊗X⊗X' ≅ Ω⊗X⊗Ω'⊗X' (and likewise for the updates), so the composite
// has parameters (Ω⊗Ω', Θ⊗Θ') and domain pair (X⊗X', A⊗A').
template <typename R>
ParamLens<R> para_tensor(const ParamLens<R>& f, const ParamLens<R>& g) {
  const std::vector<std::size_t> interchange = {0, 2, 1, 3};
  Kernel<R> fwd_perm = factor_permutation_kernel<R>(
      {f.omega(), g.omega(), f.dom(), g.dom()}, interchange);
  Kernel<R> bwd_perm = factor_permutation_kernel<R>(
      {f.theta(), f.bwd_cod(), g.theta(), g.bwd_cod()}, interchange);
  BayesianLens<R> iso(fwd_perm, StateDependentKernel<R>::constant(fwd_perm.dom(), bwd_perm));
  BayesianLens<R> composite = lens_compose(iso, lens_tensor(f.lens(), g.lens()));
  return ParamLens<R>(tensor(f.omega(), g.omega()), tensor(f.theta(), g.theta()),
                      tensor(f.dom(), g.dom()), tensor(f.bwd_cod(), g.bwd_cod()),
                      std::move(composite));
}

// A parameter-dependent state k : Ω ⇸ X as a parameterized lens
// (I,I) →^{(Ω,I)} (X,X) whose update channel discards the observation.
template <typename R>
ParamLens<R> param_state_lens(const Kernel<R>& k) {
  BayesianLens<R> lens(
      k, StateDependentKernel<R>::constant(k.dom(), discard_kernel<R>(k.cod())));
  return ParamLens<R>(k.dom(), FiniteSpace::unit(), FiniteSpace::unit(), FiniteSpace::unit(),
                      std::move(lens));
}

// Reparameterization along a 2-cell α : (Ω,Θ) ↬ (Ω',Θ'): the result is
// l ∘ (α ⊗ id_{(X,A)}) with parameters (Ω,Θ).
template <typename R>
ParamLens<R> reparameterize(const ParamLens<R>& l, const BayesianLens<R>& alpha) {
  if (alpha.cod() != l.omega() || alpha.bwd_dom() != l.theta()) {
    throw SpaceMismatch("reparameterize: 2-cell codomain pair (" + alpha.cod().label() + "," +
                        alpha.bwd_dom().label() + ") does not match parameters (" +
                        l.omega().label() + "," + l.theta().label() + ")");
  }
  BayesianLens<R> widened = lens_tensor(alpha, identity_lens<R>(l.dom(), l.bwd_cod()));
  BayesianLens<R> composite = lens_compose(widened, l.lens());
  return ParamLens<R>(alpha.dom(), alpha.bwd_cod(), l.dom(), l.bwd_cod(), std::move(composite));
}

// Clamping a strategy: reparameterize along (dirac(ω), ⋎). The forward input
// is fixed to ω and the updated parameters are marginalized away, leaving an
// ordinary lens (X,A) ↬ (Y,B).
template <typename R>
BayesianLens<R> fix_parameter(const ParamLens<R>& l, std::string_view point) {
  return reparameterize(l, point_lens<R>(l.omega(), l.theta(), point)).lens();
}

}  // namespace statlens

#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "statlens/dist.hpp"

namespace statlens {

// A stochastic channel dom ⇸ cod: one normalized distribution over cod per
// dom outcome. Rows may be UNDEFINED (no posterior exists at a zero-evidence
// observation); reading an undefined row throws UnsupportedObservation.
// Kernels built directly are total; only inversion produces partial ones.
template <typename R>
class Kernel {
 public:
  Kernel(FiniteSpace dom, FiniteSpace cod, std::vector<Dist<R>> rows)
      : dom_(std::move(dom)), cod_(std::move(cod)) {
    rows_.reserve(rows.size());
    for (auto& r : rows) rows_.emplace_back(std::move(r));
    validate();
  }

  Kernel(FiniteSpace dom, FiniteSpace cod, std::vector<std::optional<Dist<R>>> rows)
      : dom_(std::move(dom)), cod_(std::move(cod)), rows_(std::move(rows)) {
    validate();
  }

  static Kernel identity(const FiniteSpace& space) {
    return deterministic(space, space, [](std::size_t i) { return i; });
  }

  // Kernel whose rows are point masses: x ↦ dirac(map(x)).
  static Kernel deterministic(const FiniteSpace& dom, const FiniteSpace& cod,
                              const std::function<std::size_t(std::size_t)>& map) {
    std::vector<Dist<R>> rows;
    rows.reserve(dom.size());
    for (std::size_t i = 0; i < dom.size(); ++i) rows.push_back(Dist<R>::dirac(cod, map(i)));
    return Kernel(dom, cod, std::move(rows));
  }

  // A state π : I ⇸ X as a one-row kernel.
  static Kernel from_state(const Dist<R>& state) {
    return Kernel(FiniteSpace::unit(), state.space(), std::vector<Dist<R>>{state});
  }

  const FiniteSpace& dom() const { return dom_; }
  const FiniteSpace& cod() const { return cod_; }

  const Dist<R>& row(std::size_t x) const {
    check_index(x);
    if (!rows_[x]) {
      throw UnsupportedObservation("kernel " + dom_.label() + " ⇸ " + cod_.label() +
                                   " has no row at \"" + dom_.outcome(x) + "\"");
    }
    return *rows_[x];
  }
  const Dist<R>& row(std::string_view outcome) const { return row(dom_.index_of(outcome)); }

  bool row_defined(std::size_t x) const {
    check_index(x);
    return rows_[x].has_value();
  }

  bool total() const {
    for (const auto& r : rows_) {
      if (!r) return false;
    }
    return true;
  }

  // Conditional weight c(y | x).
  const R& prob(std::size_t y, std::size_t x) const { return row(x).weights()[y]; }

  bool operator==(const Kernel& other) const {
    return dom_ == other.dom_ && cod_ == other.cod_ && rows_ == other.rows_;
  }
  bool operator!=(const Kernel& other) const { return !(*this == other); }

 private:
  void validate() const {
    if (rows_.size() != dom_.size()) {
      throw InvalidValue("kernel row count does not match domain " + dom_.label());
    }
    for (const auto& r : rows_) {
      if (r && r->space() != cod_) {
        throw InvalidValue("kernel row lives on " + r->space().label() + ", expected codomain " +
                           cod_.label());
      }
    }
  }
  void check_index(std::size_t x) const {
    if (x >= rows_.size()) {
      throw UnknownOutcome("row index out of range for kernel domain " + dom_.label());
    }
  }

  FiniteSpace dom_;
  FiniteSpace cod_;
  std::vector<std::optional<Dist<R>>> rows_;
};

// Point mass at an outcome: the rows of the identity (Dirac) kernel.
template <typename R>
Dist<R> dirac(const FiniteSpace& space, std::string_view outcome) {
  return Dist<R>::dirac(space, outcome);
}

// Chapman-Kolmogorov composite d∘c : X ⇸ Z, (d∘c)(z|x) = Σ_y d(z|y)·c(y|x).
// Undefined rows of c stay undefined; an undefined row of d is an error only
// if c actually reaches it with positive weight.
template <typename R>
Kernel<R> compose_kernels(const Kernel<R>& c, const Kernel<R>& d) {
  if (c.cod() != d.dom()) {
    throw SpaceMismatch("compose: " + c.cod().label() + " does not match " + d.dom().label());
  }
  std::vector<std::optional<Dist<R>>> rows;
  rows.reserve(c.dom().size());
  for (std::size_t x = 0; x < c.dom().size(); ++x) {
    if (!c.row_defined(x)) {
      rows.emplace_back(std::nullopt);
      continue;
    }
    const Dist<R>& cx = c.row(x);
    std::vector<R> w(d.cod().size(), num_traits<R>::zero());
    for (std::size_t y = 0; y < cx.size(); ++y) {
      const R& p = cx.weights()[y];
      if (num_traits<R>::is_zero(p)) continue;
      const Dist<R>& dy = d.row(y);
      for (std::size_t z = 0; z < w.size(); ++z) w[z] += dy.weights()[z] * p;
    }
    rows.emplace_back(Dist<R>(d.cod(), std::move(w)));
  }
  return Kernel<R>(c.dom(), d.cod(), std::move(rows));
}

// Pushforward c∘π of a state through a channel.
template <typename R>
Dist<R> pushforward(const Dist<R>& pi, const Kernel<R>& c) {
  if (c.dom() != pi.space()) {
    throw SpaceMismatch("pushforward: state on " + pi.space().label() + ", kernel domain " +
                        c.dom().label());
  }
  std::vector<R> w(c.cod().size(), num_traits<R>::zero());
  for (std::size_t x = 0; x < pi.size(); ++x) {
    const R& p = pi.weights()[x];
    if (num_traits<R>::is_zero(p)) continue;
    const Dist<R>& cx = c.row(x);
    for (std::size_t y = 0; y < w.size(); ++y) w[y] += cx.weights()[y] * p;
  }
  return Dist<R>(c.cod(), std::move(w));
}

// Parallel composite f⊗g, (f⊗g)((a,b)|(x,y)) = f(a|x)·g(b|y).
template <typename R>
Kernel<R> tensor_kernels(const Kernel<R>& f, const Kernel<R>& g) {
  FiniteSpace dom = tensor(f.dom(), g.dom());
  FiniteSpace cod = tensor(f.cod(), g.cod());
  std::vector<std::optional<Dist<R>>> rows;
  rows.reserve(dom.size());
  for (std::size_t x = 0; x < f.dom().size(); ++x) {
    for (std::size_t y = 0; y < g.dom().size(); ++y) {
      if (!f.row_defined(x) || !g.row_defined(y)) {
        rows.emplace_back(std::nullopt);
      } else {
        rows.emplace_back(tensor(f.row(x), g.row(y)));
      }
    }
  }
  return Kernel<R>(std::move(dom), std::move(cod), std::move(rows));
}

// Comonoid structure: copy sends x ↦ (x,x), discard maps everything to I.
template <typename R>
Kernel<R> copy_kernel(const FiniteSpace& space) {
  const std::size_t n = space.size();
  return Kernel<R>::deterministic(space, tensor(space, space),
                                  [n](std::size_t x) { return pair_index(x, x, n); });
}

template <typename R>
Kernel<R> discard_kernel(const FiniteSpace& space) {
  return Kernel<R>::deterministic(space, FiniteSpace::unit(), [](std::size_t) { return 0; });
}

// Monoidal symmetry swap : X⊗Y → Y⊗X.
template <typename R>
Kernel<R> swap_kernel(const FiniteSpace& x, const FiniteSpace& y) {
  const std::size_t nx = x.size();
  const std::size_t ny = y.size();
  return Kernel<R>::deterministic(tensor(x, y), tensor(y, x), [nx, ny](std::size_t i) {
    return pair_index(i % ny, i / ny, nx);
  });
}

// Deterministic relabeling that reorders the flattened factors of a product
// space: outcome (o_0,...,o_{k-1}) ↦ (o_{perm[0]},...,o_{perm[k-1]}).
template <typename R>
Kernel<R> factor_permutation_kernel(const std::vector<FiniteSpace>& factors,
                                    const std::vector<std::size_t>& perm) {
  if (perm.size() != factors.size()) {
    throw InvalidValue("permutation length does not match factor count");
  }
  std::vector<std::size_t> sizes;
  sizes.reserve(factors.size());
  for (const auto& f : factors) sizes.push_back(f.size());

  std::vector<FiniteSpace> permuted;
  permuted.reserve(factors.size());
  for (std::size_t p : perm) permuted.push_back(factors.at(p));

  FiniteSpace dom = tensor_all(factors);
  FiniteSpace cod = tensor_all(permuted);
  auto map = [sizes, perm](std::size_t i) {
    std::vector<std::size_t> digits(sizes.size());
    for (std::size_t k = sizes.size(); k-- > 0;) {
      digits[k] = i % sizes[k];
      i /= sizes[k];
    }
    std::size_t out = 0;
    for (std::size_t p : perm) out = out * sizes[p] + digits[p];
    return out;
  };
  return Kernel<R>::deterministic(dom, cod, map);
}

// Joint state of a generative model (π, c): ω(x,y) = c(y|x)·π(x).
template <typename R>
Dist<R> joint_of_model(const Dist<R>& pi, const Kernel<R>& c) {
  if (c.dom() != pi.space()) {
    throw SpaceMismatch("joint: prior on " + pi.space().label() + ", channel domain " +
                        c.dom().label());
  }
  FiniteSpace prod = tensor(pi.space(), c.cod());
  const std::size_t ny = c.cod().size();
  std::vector<R> w(prod.size(), num_traits<R>::zero());
  for (std::size_t x = 0; x < pi.size(); ++x) {
    const R& p = pi.weights()[x];
    if (num_traits<R>::is_zero(p)) continue;
    const Dist<R>& cx = c.row(x);
    for (std::size_t y = 0; y < ny; ++y) w[pair_index(x, y, ny)] = cx.weights()[y] * p;
  }
  return Dist<R>(std::move(prod), std::move(w));
}

// Density of a channel with respect to counting measure: p_c(x,y) = c(y|x),
// as an effect on X⊗Y.
template <typename R>
Effect<R> density(const Kernel<R>& c) {
  FiniteSpace prod = tensor(c.dom(), c.cod());
  const std::size_t ny = c.cod().size();
  std::vector<R> v(prod.size(), num_traits<R>::zero());
  for (std::size_t x = 0; x < c.dom().size(); ++x) {
    const Dist<R>& cx = c.row(x);
    for (std::size_t y = 0; y < ny; ++y) v[pair_index(x, y, ny)] = cx.weights()[y];
  }
  return Effect<R>(std::move(prod), std::move(v));
}

// π-almost-equality: the generative models (π,c) and (π,d) induce the same
// joint. Exact in rational mode; entrywise within tol in float mode. Rows at
// π-null inputs are never read, so kernels may disagree (or be undefined)
// there.
template <typename R>
bool almost_equal(const Kernel<R>& c, const Kernel<R>& d, const Dist<R>& pi, double tol = 0.0) {
  if (c.dom() != d.dom() || c.cod() != d.cod()) {
    throw SpaceMismatch("almost_equal: kernels are not parallel");
  }
  if (c.dom() != pi.space()) {
    throw SpaceMismatch("almost_equal: state lives on " + pi.space().label());
  }
  for (std::size_t x = 0; x < pi.size(); ++x) {
    const R& p = pi.weights()[x];
    if (num_traits<R>::is_zero(p)) continue;
    const Dist<R>& cx = c.row(x);
    const Dist<R>& dx = d.row(x);
    for (std::size_t y = 0; y < cx.size(); ++y) {
      if constexpr (num_traits<R>::exact) {
        if (cx.weights()[y] * p != dx.weights()[y] * p) return false;
      } else {
        if (std::abs(num_traits<R>::to_double(cx.weights()[y] * p) -
                     num_traits<R>::to_double(dx.weights()[y] * p)) > tol) {
          return false;
        }
      }
    }
  }
  return true;
}

// Largest |c(y|x) − d(y|x)| over rows defined in both kernels.
template <typename R>
double max_row_deviation(const Kernel<R>& c, const Kernel<R>& d) {
  if (c.dom() != d.dom() || c.cod() != d.cod()) {
    throw SpaceMismatch("max_row_deviation: kernels are not parallel");
  }
  double m = 0.0;
  for (std::size_t x = 0; x < c.dom().size(); ++x) {
    if (!c.row_defined(x) || !d.row_defined(x)) continue;
    m = std::max(m, max_abs_diff(c.row(x), d.row(x)));
  }
  return m;
}

}  // namespace statlens

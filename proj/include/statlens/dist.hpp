#pragma once

#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include "statlens/errors.hpp"
#include "statlens/rational.hpp"
#include "statlens/space.hpp"

namespace statlens {

// Validation thresholds for float-mode distributions: a weight vector whose
// sum is within `sum_tol` of 1 is accepted as-is, within `renorm_tol` it is
// renormalized, and anything further off is rejected.
inline constexpr double kDistSumTol = 1e-12;
inline constexpr double kDistRenormTol = 1e-9;

// A normalized distribution over a finite space. Weights are dense, indexed
// by outcome index. R is Rat (exact) or double (float mode).
template <typename R>
class Dist {
 public:
  Dist(FiniteSpace space, std::vector<R> weights)
      : space_(std::move(space)), weights_(std::move(weights)) {
    validate();
  }

  // Normalizes an arbitrary nonnegative, not-all-zero weight vector.
  static Dist normalized(FiniteSpace space, std::vector<R> weights) {
    R total = num_traits<R>::zero();
    for (const R& w : weights) {
      if (num_traits<R>::is_negative(w)) throw InvalidValue("negative weight in distribution");
      total += w;
    }
    if (num_traits<R>::is_zero(total)) throw InvalidValue("cannot normalize all-zero weights");
    for (R& w : weights) w /= total;
    return Dist(std::move(space), std::move(weights));
  }

  static Dist dirac(const FiniteSpace& space, std::size_t index) {
    if (index >= space.size()) {
      throw UnknownOutcome("dirac index out of range for space " + space.label());
    }
    std::vector<R> w(space.size(), num_traits<R>::zero());
    w[index] = num_traits<R>::one();
    return Dist(space, std::move(w));
  }

  static Dist dirac(const FiniteSpace& space, std::string_view outcome) {
    return dirac(space, space.index_of(outcome));
  }

  static Dist uniform(const FiniteSpace& space) {
    std::vector<R> w(space.size(), num_traits<R>::one());
    return normalized(space, std::move(w));
  }

  // The unique state on the unit space I.
  static Dist unit_state() { return dirac(FiniteSpace::unit(), std::size_t{0}); }

  const FiniteSpace& space() const { return space_; }
  const std::vector<R>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }

  const R& weight(std::size_t index) const {
    if (index >= weights_.size()) {
      throw UnknownOutcome("weight index out of range for space " + space_.label());
    }
    return weights_[index];
  }
  const R& weight(std::string_view outcome) const { return weights_[space_.index_of(outcome)]; }

  // Outcome indices with strictly positive weight.
  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (!num_traits<R>::is_zero(weights_[i])) s.push_back(i);
    }
    return s;
  }

  bool operator==(const Dist& other) const {
    return space_ == other.space_ && weights_ == other.weights_;
  }
  bool operator!=(const Dist& other) const { return !(*this == other); }

 private:
  void validate() {
    if (weights_.size() != space_.size()) {
      throw InvalidValue("weight count does not match space " + space_.label());
    }
    R total = num_traits<R>::zero();
    for (const R& w : weights_) {
      if (num_traits<R>::is_negative(w)) throw InvalidValue("negative weight in distribution");
      total += w;
    }
    if constexpr (num_traits<R>::exact) {
      if (total != num_traits<R>::one()) {
        throw InvalidValue("rational distribution weights must sum to 1 exactly (got " +
                           statlens::to_string(total) + ")");
      }
    } else {
      const double gap = std::abs(num_traits<R>::to_double(total) - 1.0);
      if (gap > kDistRenormTol) {
        throw InvalidValue("distribution weights sum to " + std::to_string(total) +
                           ", outside renormalization tolerance");
      }
      if (gap > kDistSumTol) {
        for (R& w : weights_) w /= total;
      }
    }
  }

  FiniteSpace space_;
  std::vector<R> weights_;
};

// A nonnegative-valued function on a finite space (a density, a likelihood,
// a loss). No normalization constraint; values must be finite.
template <typename R>
class Effect {
 public:
  Effect(FiniteSpace space, std::vector<R> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (values_.size() != space_.size()) {
      throw InvalidValue("effect value count does not match space " + space_.label());
    }
    for (const R& v : values_) {
      if (num_traits<R>::is_negative(v)) throw InvalidValue("negative value in effect");
      if constexpr (!num_traits<R>::exact) {
        if (!std::isfinite(num_traits<R>::to_double(v))) {
          throw InvalidValue("non-finite value in effect");
        }
      }
    }
  }

  static Effect constant(const FiniteSpace& space, const R& value) {
    return Effect(space, std::vector<R>(space.size(), value));
  }

  const FiniteSpace& space() const { return space_; }
  const std::vector<R>& values() const { return values_; }
  const R& value(std::size_t index) const {
    if (index >= values_.size()) {
      throw UnknownOutcome("effect index out of range for space " + space_.label());
    }
    return values_[index];
  }
  const R& value(std::string_view outcome) const { return values_[space_.index_of(outcome)]; }

 private:
  FiniteSpace space_;
  std::vector<R> values_;
};

// Validity of an effect in a state: E_{ω∼π}[p] = Σ_ω p(ω)·π(ω).
template <typename R>
R expectation(const Dist<R>& pi, const Effect<R>& p) {
  if (pi.space() != p.space()) {
    throw SpaceMismatch("expectation over " + pi.space().label() + " of effect on " +
                        p.space().label());
  }
  R total = num_traits<R>::zero();
  for (std::size_t i = 0; i < pi.size(); ++i) total += p.values()[i] * pi.weights()[i];
  return total;
}

// Product state π⊗ρ on the tensor space (independent coupling).
template <typename R>
Dist<R> tensor(const Dist<R>& a, const Dist<R>& b) {
  FiniteSpace prod = tensor(a.space(), b.space());
  std::vector<R> w(prod.size(), num_traits<R>::zero());
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      w[pair_index(i, j, nb)] = a.weights()[i] * b.weights()[j];
    }
  }
  return Dist<R>(std::move(prod), std::move(w));
}

// Marginals of a joint state on left⊗right. The split is given explicitly
// because flattened product spaces admit several binary readings.
template <typename R>
Dist<R> marginal_left(const Dist<R>& omega, const FiniteSpace& left, const FiniteSpace& right) {
  if (tensor(left, right) != omega.space()) {
    throw SpaceMismatch("marginal split " + left.label() + " ⊗ " + right.label() +
                        " does not match " + omega.space().label());
  }
  std::vector<R> w(left.size(), num_traits<R>::zero());
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < right.size(); ++j) {
      w[i] += omega.weights()[pair_index(i, j, right.size())];
    }
  }
  return Dist<R>(left, std::move(w));
}

template <typename R>
Dist<R> marginal_right(const Dist<R>& omega, const FiniteSpace& left, const FiniteSpace& right) {
  if (tensor(left, right) != omega.space()) {
    throw SpaceMismatch("marginal split " + left.label() + " ⊗ " + right.label() +
                        " does not match " + omega.space().label());
  }
  std::vector<R> w(right.size(), num_traits<R>::zero());
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < right.size(); ++j) {
      w[j] += omega.weights()[pair_index(i, j, right.size())];
    }
  }
  return Dist<R>(right, std::move(w));
}

enum class Side { left, right };

// Marginal along the recorded binary split of the joint's space.
template <typename R>
Dist<R> marginal(const Dist<R>& omega, Side side) {
  if (!omega.space().is_product()) {
    throw NotAProductSpace("marginal of a state on non-product space " + omega.space().label());
  }
  const FiniteSpace& l = omega.space().left();
  const FiniteSpace& r = omega.space().right();
  return side == Side::left ? marginal_left(omega, l, r) : marginal_right(omega, l, r);
}

// Largest absolute weight difference between two parallel states.
template <typename R>
double max_abs_diff(const Dist<R>& a, const Dist<R>& b) {
  if (a.space() != b.space()) {
    throw SpaceMismatch("comparing states on " + a.space().label() + " and " + b.space().label());
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(num_traits<R>::to_double(a.weights()[i]) -
                             num_traits<R>::to_double(b.weights()[i])));
  }
  return m;
}

}  // namespace statlens

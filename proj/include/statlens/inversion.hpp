#pragma once

#include <cmath>
#include <limits>

#include "statlens/kernel.hpp"

namespace statlens {

// Exact Bayesian inversion of a finite channel with respect to a prior.
// Posterior rows exist exactly on the support of the evidence c∘π; the
// remaining observations are listed in `unsupported` and reading their rows
// raises UnsupportedObservation.
template <typename R>
struct InversionResult {
  Kernel<R> posterior;                    // Y ⇸ X, partial off-support
  Dist<R> evidence;                       // c∘π
  std::vector<std::size_t> unsupported;   // Y-outcomes with zero evidence
};

// Bayes' rule via densities: posterior(x|y) = c(y|x)·π(x) / Σ_x' c(y|x')·π(x').
template <typename R>
InversionResult<R> invert(const Kernel<R>& c, const Dist<R>& pi) {
  if (c.dom() != pi.space()) {
    throw SpaceMismatch("invert: prior on " + pi.space().label() + ", channel domain " +
                        c.dom().label());
  }
  Dist<R> evidence = pushforward(pi, c);
  const std::size_t nx = pi.size();
  const std::size_t ny = evidence.size();
  std::vector<std::optional<Dist<R>>> rows(ny);
  std::vector<std::size_t> unsupported;
  for (std::size_t y = 0; y < ny; ++y) {
    const R& ev = evidence.weights()[y];
    if (num_traits<R>::is_zero(ev)) {
      unsupported.push_back(y);
      continue;
    }
    std::vector<R> w(nx, num_traits<R>::zero());
    for (std::size_t x = 0; x < nx; ++x) {
      const R& p = pi.weights()[x];
      if (num_traits<R>::is_zero(p)) continue;
      w[x] = c.row(x).weights()[y] * p / ev;
    }
    rows[y] = Dist<R>(pi.space(), std::move(w));
  }
  return InversionResult<R>{Kernel<R>(c.cod(), pi.space(), std::move(rows)),
                            std::move(evidence), std::move(unsupported)};
}

// The defining equation of Bayesian inversion: the joint of (π, c) equals,
// after transposition, the joint of (c∘π, inv). Exact in rational mode.
template <typename R>
bool check_bayes_equation(const Kernel<R>& c, const Dist<R>& pi, const Kernel<R>& inv,
                          double tol = 0.0) {
  if (c.dom() != pi.space() || inv.dom() != c.cod() || inv.cod() != c.dom()) {
    throw SpaceMismatch("check_bayes_equation: incompatible types");
  }
  const Dist<R> fwd_joint = joint_of_model(pi, c);          // on X⊗Y
  const Dist<R> bwd_joint = joint_of_model(pushforward(pi, c), inv);  // on Y⊗X
  const std::size_t nx = pi.size();
  const std::size_t ny = c.cod().size();
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      const R& a = fwd_joint.weights()[pair_index(x, y, ny)];
      const R& b = bwd_joint.weights()[pair_index(y, x, nx)];
      if constexpr (num_traits<R>::exact) {
        if (a != b) return false;
      } else {
        if (std::abs(num_traits<R>::to_double(a) - num_traits<R>::to_double(b)) > tol) {
          return false;
        }
      }
    }
  }
  return true;
}

// Kullback-Leibler divergence in nats, with 0·log 0 = 0 and +∞ on support
// violation.
template <typename R>
double kl_divergence(const Dist<R>& alpha, const Dist<R>& beta) {
  if (alpha.space() != beta.space()) {
    throw SpaceMismatch("kl_divergence: states on different spaces");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double a = num_traits<R>::to_double(alpha.weights()[i]);
    if (a == 0.0) continue;
    const double b = num_traits<R>::to_double(beta.weights()[i]);
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    total += a * (std::log(a) - std::log(b));
  }
  return total;
}

// Total variation distance, (1/2)·Σ|α − β|.
template <typename R>
double tv_distance(const Dist<R>& alpha, const Dist<R>& beta) {
  if (alpha.space() != beta.space()) {
    throw SpaceMismatch("tv_distance: states on different spaces");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    total += std::abs(num_traits<R>::to_double(alpha.weights()[i]) -
                      num_traits<R>::to_double(beta.weights()[i]));
  }
  return 0.5 * total;
}

// Shannon entropy in nats.
template <typename R>
double shannon_entropy(const Dist<R>& pi) {
  double total = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const double p = num_traits<R>::to_double(pi.weights()[i]);
    if (p > 0.0) total -= p * std::log(p);
  }
  return total;
}

// log p_{c∘π}(y) in nats; −∞ for unsupported observations.
template <typename R>
double log_evidence(const Dist<R>& pi, const Kernel<R>& c, std::size_t y) {
  const Dist<R> evidence = pushforward(pi, c);
  const double ev = num_traits<R>::to_double(evidence.weight(y));
  return ev == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(ev);
}

template <typename R>
double log_evidence(const Dist<R>& pi, const Kernel<R>& c, std::string_view y) {
  return log_evidence(pi, c, c.cod().index_of(y));
}

}  // namespace statlens

#pragma once

#include <cmath>
#include <optional>

#include "statlens/games.hpp"

namespace statlens {

// Plain gradient descent with a halving backtracking line search. Trace is
// monotone non-increasing; a step is accepted only when it satisfies the
// sufficient-decrease condition f(x − t·g) ≤ f(x) − armijo·t·‖g‖², which
// keeps accepted steps inside the stable region and rules out bouncing
// across a minimum at full step.
struct OptimConfig {
  int max_iters = 5000;
  double tol = 1e-10;     // stop when an iteration improves by less than this
  double step = 1.0;      // initial step size, reset every iteration
  int max_halvings = 30;
  double armijo = 0.5;
  double fd_step = 1e-5;  // central-difference step when no analytic gradient
};

struct OptimResult {
  std::vector<double> best_params;
  std::vector<double> trace;  // objective value at init and after each accepted step
  double best_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;
using Gradient = std::function<std::vector<double>(const std::vector<double>&)>;

inline std::vector<double> finite_difference_gradient(const Objective& f,
                                                      const std::vector<double>& x, double h) {
  std::vector<double> g(x.size());
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline OptimResult minimize(const Objective& f, const std::optional<Gradient>& grad,
                            std::vector<double> init, const OptimConfig& config) {
  OptimResult result;
  double current = f(init);
  if (!std::isfinite(current)) {
    throw DivergedFitness("objective is not finite at the initial point");
  }
  std::vector<double> x = std::move(init);
  result.trace.push_back(current);
  for (int iter = 0; iter < config.max_iters; ++iter) {
    const std::vector<double> g =
        grad ? (*grad)(x) : finite_difference_gradient(f, x, config.fd_step);
    double grad_norm_sq = 0.0;
    for (double gi : g) grad_norm_sq += gi * gi;
    double step = config.step;
    bool accepted = false;
    std::vector<double> candidate(x.size());
    for (int h = 0; h <= config.max_halvings; ++h, step *= 0.5) {
      for (std::size_t i = 0; i < x.size(); ++i) candidate[i] = x[i] - step * g[i];
      const double value = f(candidate);
      if (std::isfinite(value) && value < current &&
          value <= current - config.armijo * step * grad_norm_sq) {
        const double improvement = current - value;
        x = candidate;
        current = value;
        result.trace.push_back(current);
        ++result.iterations;
        accepted = true;
        if (improvement < config.tol) {
          result.converged = true;
        }
        break;
      }
    }
    if (!accepted) {
      // No finite improving step at any probed scale: stationary for our purposes.
      result.converged = true;
    }
    if (result.converged) break;
  }
  result.best_params = std::move(x);
  result.best_value = current;
  return result;
}

// A softmax-parameterized family of distributions over a fixed outcome
// space, one row of logits per observation. Row r realizes the distribution
// softmax(logits[r,:]).
class SimplexFamily {
 public:
  SimplexFamily(FiniteSpace space, std::size_t rows)
      : SimplexFamily(std::move(space), rows, std::vector<double>(rows * space.size(), 0.0)) {}

  SimplexFamily(FiniteSpace space, std::size_t rows, std::vector<double> logits)
      : space_(std::move(space)), rows_(rows), logits_(std::move(logits)) {
    if (rows_ == 0) throw InvalidValue("simplex family needs at least one row");
    if (logits_.size() != rows_ * space_.size()) {
      throw InvalidValue("simplex family logits have the wrong length");
    }
  }

  const FiniteSpace& space() const { return space_; }
  std::size_t rows() const { return rows_; }
  const std::vector<double>& logits() const { return logits_; }

  SimplexFamily with_logits(std::vector<double> logits) const {
    return SimplexFamily(space_, rows_, std::move(logits));
  }

  Dist<double> row_dist(std::size_t r) const {
    if (r >= rows_) throw UnknownOutcome("simplex family row out of range");
    const std::size_t n = space_.size();
    std::vector<double> w(n);
    double max_logit = logits_[r * n];
    for (std::size_t i = 1; i < n; ++i) max_logit = std::max(max_logit, logits_[r * n + i]);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(logits_[r * n + i] - max_logit);
    return Dist<double>::normalized(space_, std::move(w));
  }

  // The family as a kernel obs ⇸ space (one row per observation).
  Kernel<double> as_kernel(const FiniteSpace& obs) const {
    if (obs.size() != rows_) {
      throw SpaceMismatch("simplex family has " + std::to_string(rows_) + " rows, space " +
                          obs.label() + " has " + std::to_string(obs.size()) + " outcomes");
    }
    std::vector<Dist<double>> rows;
    rows.reserve(rows_);
    for (std::size_t r = 0; r < rows_; ++r) rows.push_back(row_dist(r));
    return Kernel<double>(obs, space_, std::move(rows));
  }

  // Single-row family as a state (a mixed strategy over the outcome space).
  Dist<double> as_dist() const {
    if (rows_ != 1) throw InvalidValue("as_dist requires a one-row family");
    return row_dist(0);
  }

 private:
  FiniteSpace space_;
  std::size_t rows_;
  std::vector<double> logits_;
};

// An optimization objective over a simplex family's logits, optionally with
// an analytic gradient.
struct FitnessObjective {
  Objective value;
  std::optional<Gradient> gradient;
};

// Gradient descent on the family's logits. Uses the analytic gradient when
// the objective provides one, central finite differences otherwise.
inline OptimResult optimize_fitness(const FitnessObjective& objective,
                                    const SimplexFamily& family, const OptimConfig& config) {
  return minimize(objective.value, objective.gradient, family.logits(), config);
}

// ---------------------------------------------------------------------------
// Objective builders.

// KL-autoencoder (variational free energy) objective for the update channel:
// the family's rows, indexed by observations, form the approximate posterior
// kernel of a lens with the given fixed forwards channel. Feedback and prior
// depend only on the forwards channel, so they are precomputed; the analytic
// gradient is the standard softmax gradient of
//   Σ_y efb(y)·( E_{q_y}[−log p_c(y|x)] + KL(q_y, π) ).
inline FitnessObjective autoencoder_kl_objective(const Kernel<double>& forward,
                                                 const GameContext<double>& ctx) {
  const FiniteSpace x_space = forward.dom();
  const FiniteSpace y_space = forward.cod();
  // Prior and feedback are invariant in the update channel; evaluate them
  // with a placeholder backward.
  const BayesianLens<double> placeholder(
      forward,
      StateDependentKernel<double>(x_space, y_space, x_space,
                                   [y_space, x_space](const Dist<double>&) {
                                     std::vector<Dist<double>> rows(
                                         y_space.size(), Dist<double>::uniform(x_space));
                                     return Kernel<double>(y_space, x_space, std::move(rows));
                                   }));
  const Dist<double> pi = prior_base(ctx, placeholder);
  const Dist<double> efb = feedback(ctx, placeholder);

  const std::size_t nx = x_space.size();
  const std::size_t ny = y_space.size();
  std::vector<double> neg_log_lik(ny * nx);
  for (std::size_t y = 0; y < ny; ++y) {
    if (efb.weights()[y] == 0.0) continue;
    for (std::size_t x = 0; x < nx; ++x) {
      const double lik = forward.row(x).weights()[y];
      neg_log_lik[y * nx + x] =
          lik == 0.0 ? std::numeric_limits<double>::infinity() : -std::log(lik);
    }
  }
  std::vector<double> log_pi(nx);
  for (std::size_t x = 0; x < nx; ++x) {
    const double p = pi.weights()[x];
    log_pi[x] = p == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(p);
  }

  auto row_softmax = [nx](const std::vector<double>& logits, std::size_t y) {
    std::vector<double> q(nx);
    double max_logit = logits[y * nx];
    for (std::size_t x = 1; x < nx; ++x) max_logit = std::max(max_logit, logits[y * nx + x]);
    double total = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      q[x] = std::exp(logits[y * nx + x] - max_logit);
      total += q[x];
    }
    for (double& v : q) v /= total;
    return q;
  };

  Objective value = [efb, neg_log_lik, log_pi, nx, ny, row_softmax](
                        const std::vector<double>& logits) {
    double total = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      const double w = efb.weights()[y];
      if (w == 0.0) continue;
      const std::vector<double> q = row_softmax(logits, y);
      double fy = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        if (q[x] == 0.0) continue;
        fy += q[x] * (neg_log_lik[y * nx + x] + std::log(q[x]) - log_pi[x]);
      }
      total += w * fy;
    }
    return total;
  };

  Gradient gradient = [efb, neg_log_lik, log_pi, nx, ny, row_softmax](
                          const std::vector<double>& logits) {
    std::vector<double> g(logits.size(), 0.0);
    for (std::size_t y = 0; y < ny; ++y) {
      const double w = efb.weights()[y];
      if (w == 0.0) continue;
      const std::vector<double> q = row_softmax(logits, y);
      std::vector<double> inner(nx);
      double mean_inner = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        inner[x] = neg_log_lik[y * nx + x] + std::log(q[x]) + 1.0 - log_pi[x];
        mean_inner += q[x] * inner[x];
      }
      for (std::size_t x = 0; x < nx; ++x) {
        g[y * nx + x] = w * q[x] * (inner[x] - mean_inner);
      }
    }
    return g;
  };

  return FitnessObjective{std::move(value), std::move(gradient)};
}

// Generic D-autoencoder objective via the games module (finite differences).
inline FitnessObjective autoencoder_objective(const Kernel<double>& forward,
                                              const GameContext<double>& ctx,
                                              DivergenceFn<double> divergence) {
  const FiniteSpace x_space = forward.dom();
  const FiniteSpace y_space = forward.cod();
  Objective value = [forward, ctx, divergence, x_space, y_space](
                        const std::vector<double>& logits) {
    SimplexFamily family(x_space, y_space.size(), logits);
    Kernel<double> backward = family.as_kernel(y_space);
    BayesianLens<double> lens(forward,
                              StateDependentKernel<double>::constant(x_space, backward));
    return autoencoder_fitness(lens, divergence)(ctx);
  };
  return FitnessObjective{std::move(value), std::nullopt};
}

// Negative maximum-log-likelihood objective over a one-row family realizing
// the parameter strategy π_Ω of a parameterized state lens. The analytic
// gradient assumes the context's continuation ignores its input (an
// empirical-replay feedback), which makes the feedback constant in the
// strategy; pass analytic = false otherwise.
inline FitnessObjective replay_mle_objective(const ParamLens<double>& l,
                                             const GameContext<double>& ctx,
                                             bool analytic = true) {
  const Kernel<double> forward = l.lens().forward();  // Ω ⇸ X
  const FiniteSpace omega = l.omega();
  const FiniteSpace x_space = forward.cod();

  Objective value = [l, ctx, omega](const std::vector<double>& logits) {
    SimplexFamily family(omega, 1, logits);
    GameContext<double> bound{ctx.residual_fwd, ctx.residual_bwd, family.as_dist(),
                              ctx.continuation};
    return -param_mle_fitness(l, [](double p) { return std::log(p); })(bound);
  };

  if (!analytic) return FitnessObjective{std::move(value), std::nullopt};

  GameContext<double> probe{ctx.residual_fwd, ctx.residual_bwd, Dist<double>::uniform(omega),
                            ctx.continuation};
  const Dist<double> efb = feedback(probe, l.lens());
  const std::size_t nw = omega.size();
  const std::size_t nx = x_space.size();
  Gradient gradient = [forward, efb, nw, nx](const std::vector<double>& logits) {
    // softmax of the single strategy row
    std::vector<double> s(nw);
    double max_logit = logits[0];
    for (std::size_t i = 1; i < nw; ++i) max_logit = std::max(max_logit, logits[i]);
    double total = 0.0;
    for (std::size_t i = 0; i < nw; ++i) {
      s[i] = std::exp(logits[i] - max_logit);
      total += s[i];
    }
    for (double& v : s) v /= total;
    std::vector<double> p(nx, 0.0);
    for (std::size_t w = 0; w < nw; ++w) {
      for (std::size_t x = 0; x < nx; ++x) p[x] += s[w] * forward.row(w).weights()[x];
    }
    std::vector<double> g(nw, 0.0);
    for (std::size_t w = 0; w < nw; ++w) {
      double acc = 0.0;
      for (std::size_t x = 0; x < nx; ++x) {
        const double e = efb.weights()[x];
        if (e == 0.0) continue;
        acc += e * forward.row(w).weights()[x] / p[x];
      }
      g[w] = -s[w] * (acc - 1.0);
    }
    return g;
  };
  return FitnessObjective{std::move(value), std::move(gradient)};
}

}  // namespace statlens

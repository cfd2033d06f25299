#pragma once

#include <cmath>
#include <vector>

#include "statlens/errors.hpp"
#include "statlens/optim.hpp"

namespace statlens {

// 1-D Gaussian state.
struct Gaussian1D {
  Gaussian1D(double mean_, double variance_) : mean(mean_), variance(variance_) {
    if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
      throw InvalidValue("Gaussian1D requires finite mean and positive variance");
    }
  }
  double mean;
  double variance;
};

// 1-D linear-Gaussian channel: y | x ~ N(a·x + b, noise_variance).
struct LinearGaussianKernel {
  LinearGaussianKernel(double slope_, double intercept_, double noise_variance_)
      : slope(slope_), intercept(intercept_), noise_variance(noise_variance_) {
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance) || !std::isfinite(slope) ||
        !std::isfinite(intercept)) {
      throw InvalidValue("LinearGaussianKernel requires finite parameters and positive noise");
    }
  }
  double slope;
  double intercept;
  double noise_variance;
};

inline double gaussian_log_density(const Gaussian1D& g, double x) {
  const double d = x - g.mean;
  return -0.5 * std::log(2.0 * M_PI * g.variance) - d * d / (2.0 * g.variance);
}

// Evidence of a linear-Gaussian model: N(aμ + b, a²σ² + σ_n²).
inline Gaussian1D gaussian_pushforward(const Gaussian1D& prior, const LinearGaussianKernel& k) {
  return Gaussian1D(k.slope * prior.mean + k.intercept,
                    k.slope * k.slope * prior.variance + k.noise_variance);
}

// Chained linear-Gaussian channels compose to a linear-Gaussian channel.
inline LinearGaussianKernel compose(const LinearGaussianKernel& k1,
                                    const LinearGaussianKernel& k2) {
  return LinearGaussianKernel(k2.slope * k1.slope, k2.slope * k1.intercept + k2.intercept,
                              k2.slope * k2.slope * k1.noise_variance + k2.noise_variance);
}

// Conjugate Bayesian update: posterior precision is the sum of prior
// precision and a²/σ_n²; the mean balances prior and observation.
inline Gaussian1D gaussian_invert(const Gaussian1D& prior, const LinearGaussianKernel& k,
                                  double y) {
  if (k.slope == 0.0) return prior;  // constant channel: nothing to learn
  const double precision = 1.0 / prior.variance + k.slope * k.slope / k.noise_variance;
  const double variance = 1.0 / precision;
  const double mean =
      variance * (prior.mean / prior.variance + k.slope * (y - k.intercept) / k.noise_variance);
  return Gaussian1D(mean, variance);
}

// KL(p ‖ q) between 1-D Gaussians, in nats.
inline double gaussian_kl(const Gaussian1D& p, const Gaussian1D& q) {
  const double dm = p.mean - q.mean;
  return 0.5 * std::log(q.variance / p.variance) +
         (p.variance + dm * dm) / (2.0 * q.variance) - 0.5;
}

// Variational free energy of a Gaussian q for the linear-Gaussian model at
// observation y, with all expectations in closed form:
// E_{x∼q}[−log p_k(y|x)] + KL(q ‖ prior).
inline double gaussian_free_energy(const Gaussian1D& q, const Gaussian1D& prior,
                                   const LinearGaussianKernel& k, double y) {
  const double resid = y - k.slope * q.mean - k.intercept;
  const double expected_nll = 0.5 * std::log(2.0 * M_PI * k.noise_variance) +
                              (resid * resid + k.slope * k.slope * q.variance) /
                                  (2.0 * k.noise_variance);
  return expected_nll + gaussian_kl(q, prior);
}

// Optical inversion of a two-stage chain: invert the second factor at the
// pushed-forward prior, then push the result through the first factor's
// conjugate posterior map (whose mean is affine in the observation).
inline Gaussian1D gaussian_lens_composite_invert(const Gaussian1D& prior,
                                                 const LinearGaussianKernel& k1,
                                                 const LinearGaussianKernel& k2, double z) {
  const Gaussian1D mid = gaussian_pushforward(prior, k1);
  const Gaussian1D y_post = gaussian_invert(mid, k2, z);
  // x | y ~ N(A·y + B, v) with v the conjugate posterior variance for k1.
  const double precision = 1.0 / prior.variance + k1.slope * k1.slope / k1.noise_variance;
  const double v = 1.0 / precision;
  const double a = v * k1.slope / k1.noise_variance;
  const double b = v * (prior.mean / prior.variance - k1.slope * k1.intercept / k1.noise_variance);
  return Gaussian1D(a * y_post.mean + b, v + a * a * y_post.variance);
}

struct GaussianElboResult {
  Gaussian1D q;
  std::vector<double> trace;
  double final_free_energy = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Gradient descent on (mean, log variance) of q minimizing the closed-form
// free energy; converges to the conjugate posterior.
inline GaussianElboResult gaussian_elbo_optimize(const Gaussian1D& prior,
                                                 const LinearGaussianKernel& k, double y,
                                                 const Gaussian1D& init,
                                                 const OptimConfig& config = {}) {
  Objective f = [prior, k, y](const std::vector<double>& p) {
    return gaussian_free_energy(Gaussian1D(p[0], std::exp(p[1])), prior, k, y);
  };
  Gradient grad = [prior, k, y](const std::vector<double>& p) {
    const double mu = p[0];
    const double var = std::exp(p[1]);
    const double d_mu = -k.slope * (y - k.slope * mu - k.intercept) / k.noise_variance +
                        (mu - prior.mean) / prior.variance;
    const double d_logvar = k.slope * k.slope * var / (2.0 * k.noise_variance) - 0.5 +
                            var / (2.0 * prior.variance);
    return std::vector<double>{d_mu, d_logvar};
  };
  OptimResult r = minimize(f, grad, {init.mean, std::log(init.variance)}, config);
  GaussianElboResult out{Gaussian1D(r.best_params[0], std::exp(r.best_params[1])),
                         std::move(r.trace), r.best_value, r.iterations, r.converged};
  return out;
}

}  // namespace statlens

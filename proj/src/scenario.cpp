#include "statlens/scenario.hpp"

#include <chrono>

#include <algorithm>
#include <cmath>
#include <set>

#include "statlens/games.hpp"
#include "statlens/gaussian.hpp"
#include "statlens/generate.hpp"
#include "statlens/optim.hpp"

namespace statlens {

namespace {

// --------------------------------------------------------------------------
// Schema helpers. Every failure names the JSON path that broke.

const Json& field(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "." + key + ": missing required field");
  return *it;
}

std::uint64_t as_uint(const Json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  throw SchemaError(path + ": expected a non-negative integer");
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path + ": expected a number");
  return j.get<double>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path + ": expected a string");
  return j.get<std::string>();
}

std::uint64_t uint_field(const Json& j, const std::string& path, const char* key) {
  return as_uint(field(j, path, key), path + "." + key);
}

double number_or(const Json& j, const std::string& path, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return as_number(j.at(key), path + "." + key);
}

std::uint64_t uint_or(const Json& j, const std::string& path, const char* key,
                      std::uint64_t fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return as_uint(j.at(key), path + "." + key);
}

std::vector<std::size_t> size_array(const Json& j, const std::string& path,
                                    std::size_t min_length) {
  if (!j.is_array() || j.size() < min_length) {
    throw SchemaError(path + ": expected an array of at least " + std::to_string(min_length) +
                      " sizes");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const std::uint64_t n = as_uint(j[i], p);
    if (n == 0 || n > 64) throw SchemaError(p + ": space size must be in 1..64");
    out.push_back(static_cast<std::size_t>(n));
  }
  return out;
}

double check_tol(const Json& payload, const std::string& path, double fallback) {
  const double tol = number_or(payload, path, "tol", fallback);
  if (!(tol >= 0.0)) throw SchemaError(path + ".tol: must be non-negative");
  return tol;
}

// --------------------------------------------------------------------------
// Continuation registry: the serializable builtins.

template <typename R>
Continuation<R> build_continuation(const Json& spec, const std::string& path, const FiniteSpace& m,
                                   const FiniteSpace& n, const FiniteSpace& y,
                                   const FiniteSpace& b) {
  const std::string name = as_string(field(spec, path, "name"), path + ".name");
  const Json args = spec.contains("args") ? spec.at("args") : Json::object();

  if (name == "identity") {
    if (tensor(m, y) != tensor(n, b)) {
      throw SchemaError(path + ": identity continuation needs M⊗Y = N⊗B");
    }
    return identity_continuation<R>();
  }
  if (name == "constant-state" || name == "empirical-replay") {
    Dist<R> state = [&] {
      try {
        return dist_from_json<R>(field(args, path + ".args", "state"), "feedback");
      } catch (const SchemaError&) {
        throw;
      } catch (const Error& e) {
        throw SchemaError(path + ".args.state: " + e.what());
      }
    }();
    if (state.space() != tensor(n, b)) {
      throw SchemaError(path + ".args.state: state must live on N⊗B");
    }
    return constant_continuation(std::move(state));
  }
  if (name == "label-permutation") {
    if (m != n || y != b) {
      throw SchemaError(path + ": label permutation needs M = N and B = Y");
    }
    const Json& mapping = field(args, path + ".args", "mapping");
    if (!mapping.is_object()) throw SchemaError(path + ".args.mapping: expected an object");
    std::vector<std::size_t> perm(y.size(), y.size());
    for (const auto& [from, to] : mapping.items()) {
      if (!y.contains(from) || !to.is_string() ||
          !y.contains(to.template get<std::string>())) {
        throw SchemaError(path + ".args.mapping: labels must be outcomes of the prediction space");
      }
      perm[y.index_of(from)] = y.index_of(to.template get<std::string>());
    }
    std::set<std::size_t> image(perm.begin(), perm.end());
    if (image.size() != y.size() || image.count(y.size()) > 0) {
      throw SchemaError(path + ".args.mapping: mapping must be a total bijection");
    }
    return permutation_continuation<R>(m, y, perm);
  }
  if (name == "resample-from-evidence") {
    if (!n.is_unit() || y != b) {
      throw SchemaError(path + ": resample-from-evidence needs N = I and B = Y");
    }
    return evidence_continuation<R>(m, y);
  }
  throw SchemaError(path + ".name: unknown continuation \"" + name + "\"");
}

// --------------------------------------------------------------------------
// compose-check: optical inversion of random kernel chains, exact in
// rational mode.

template <typename R>
void run_compose_check(const Scenario& scenario, Report& report) {
  const std::string path = "payload";
  const auto sizes = size_array(field(scenario.payload, path, "spaces"), path + ".spaces", 3);
  const auto instances = uint_field(scenario.payload, path, "instances");
  const double tol = check_tol(scenario.payload, path, num_traits<R>::exact ? 0.0 : 1e-12);

  double max_deviation = 0.0;
  for (std::uint64_t i = 0; i < instances; ++i) {
    SplitMix64 rng = instance_rng(scenario.seed, i);
    std::vector<FiniteSpace> spaces;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      spaces.push_back(indexed_space("s" + std::to_string(s), sizes[s]));
    }
    std::vector<Kernel<R>> kernels;
    for (std::size_t s = 0; s + 1 < spaces.size(); ++s) {
      kernels.push_back(random_kernel<R>(rng, spaces[s], spaces[s + 1]));
    }
    const Dist<R> pi = random_dist<R>(rng, spaces.front());

    Kernel<R> chain = kernels.front();
    BayesianLens<R> lens = exact_lens(kernels.front());
    for (std::size_t s = 1; s < kernels.size(); ++s) {
      chain = compose_kernels(chain, kernels[s]);
      lens = lens_compose(lens, exact_lens(kernels[s]));
    }

    const Kernel<R> direct = invert(chain, pi).posterior;
    const Kernel<R> optical = lens.backward().at(pi);
    const Dist<R> evidence = pushforward(pi, chain);
    const bool pass = almost_equal(direct, optical, evidence, tol);

    // deviation between the two induced joints, for the report
    double deviation = 0.0;
    for (std::size_t z = 0; z < evidence.size(); ++z) {
      if (num_traits<R>::is_zero(evidence.weights()[z])) continue;
      for (std::size_t x = 0; x < pi.size(); ++x) {
        deviation = std::max(
            deviation,
            std::abs(num_traits<R>::to_double(direct.row(z).weights()[x] * evidence.weights()[z]) -
                     num_traits<R>::to_double(optical.row(z).weights()[x] * evidence.weights()[z])));
      }
    }
    max_deviation = std::max(max_deviation, deviation);

    CheckResult check;
    check.name = "instance-" + std::to_string(i);
    check.pass = pass;
    check.details = Json{{"max_joint_deviation", deviation}};
    report.checks.push_back(std::move(check));
  }
  report.summary = Json{{"instances", instances},
                        {"stages", sizes.size() - 1},
                        {"max_joint_deviation", max_deviation}};
}

// --------------------------------------------------------------------------
// eubo-check / helmholtz-check: free-energy identities on random float
// instances. Every fifth instance uses the exact posterior as q to hit the
// zero-gap case of the bound.

struct EuboInstance {
  Dist<double> q;
  Kernel<double> channel;
  Dist<double> prior;
  std::size_t observation;
};

EuboInstance make_eubo_instance(SplitMix64& rng, std::size_t nx, std::size_t ny, bool exact_q) {
  const FiniteSpace x = indexed_space("x", nx);
  const FiniteSpace y = indexed_space("y", ny);
  Kernel<double> c = random_kernel<double>(rng, x, y, /*positive=*/true);
  Dist<double> pi = random_dist<double>(rng, x, /*positive=*/true);
  const std::size_t obs = rng.below(ny);
  Dist<double> q = exact_q ? invert(c, pi).posterior.row(obs) : random_dist<double>(rng, x, true);
  return EuboInstance{std::move(q), std::move(c), std::move(pi), obs};
}

void run_eubo_check(const Scenario& scenario, Report& report) {
  const std::string path = "payload";
  const auto nx = uint_field(scenario.payload, path, "x_size");
  const auto ny = uint_field(scenario.payload, path, "y_size");
  const auto instances = uint_field(scenario.payload, path, "instances");
  const double tol = check_tol(scenario.payload, path, 1e-12);

  double max_gap = 0.0;
  for (std::uint64_t i = 0; i < instances; ++i) {
    SplitMix64 rng = instance_rng(scenario.seed, i);
    const bool exact_q = (i % 5 == 4);
    const auto inst = make_eubo_instance(rng, nx, ny, exact_q);
    const auto eubo = check_eubo(inst.q, inst.channel, inst.prior, inst.observation, tol);
    // the bound is tight exactly when the approximate posterior is exact
    const double bound_gap = eubo.free_energy - eubo.neg_log_evidence;
    const bool gap_iff_kl = (bound_gap < tol) == (eubo.kl_to_exact < tol);
    max_gap = std::max(max_gap, eubo.identity_gap);

    CheckResult check;
    check.name = "instance-" + std::to_string(i);
    check.pass = eubo.holds && gap_iff_kl;
    check.details = Json{{"identity_gap", eubo.identity_gap},
                         {"free_energy", eubo.free_energy},
                         {"kl_to_exact", eubo.kl_to_exact},
                         {"neg_log_evidence", eubo.neg_log_evidence}};
    report.checks.push_back(std::move(check));
  }
  report.summary = Json{{"instances", instances}, {"max_identity_gap", max_gap}};
}

void run_helmholtz_check(const Scenario& scenario, Report& report) {
  const std::string path = "payload";
  const auto nx = uint_field(scenario.payload, path, "x_size");
  const auto ny = uint_field(scenario.payload, path, "y_size");
  const auto instances = uint_field(scenario.payload, path, "instances");
  const double tol = check_tol(scenario.payload, path, 1e-12);

  double max_gap = 0.0;
  for (std::uint64_t i = 0; i < instances; ++i) {
    SplitMix64 rng = instance_rng(scenario.seed, i);
    const auto inst = make_eubo_instance(rng, nx, ny, /*exact_q=*/false);
    const double f =
        free_energy(inst.q, inst.channel, inst.prior, inst.observation, kl_fn<double>());
    const auto parts = helmholtz_decomposition(inst.q, inst.channel, inst.prior, inst.observation);
    const double gap = std::abs(f - (parts.internal_energy - parts.entropy));
    max_gap = std::max(max_gap, gap);

    CheckResult check;
    check.name = "instance-" + std::to_string(i);
    check.pass = gap <= tol;
    check.details = Json{{"gap", gap},
                         {"free_energy", f},
                         {"internal_energy", parts.internal_energy},
                         {"entropy", parts.entropy}};
    report.checks.push_back(std::move(check));
  }
  report.summary = Json{{"instances", instances}, {"max_gap", max_gap}};
}

// --------------------------------------------------------------------------
// genbayes-coincidence: generalized Bayesian inference with l = −log p_c and
// D = KL against the autoencoder fitness, on random games and contexts.

void run_genbayes_coincidence(const Scenario& scenario, Report& report) {
  const std::string path = "payload";
  const auto nx = uint_field(scenario.payload, path, "x_size");
  const auto ny = uint_field(scenario.payload, path, "y_size");
  const auto instances = uint_field(scenario.payload, path, "instances");
  const double tol = check_tol(scenario.payload, path, 1e-12);

  double max_gap = 0.0;
  for (std::uint64_t i = 0; i < instances; ++i) {
    SplitMix64 rng = instance_rng(scenario.seed, i);
    const FiniteSpace x = indexed_space("x", nx);
    const FiniteSpace y = indexed_space("y", ny);
    const auto forward = random_kernel<double>(rng, x, y, true);
    const BayesianLens<double> lens(
        forward, StateDependentKernel<double>::constant(x, random_kernel<double>(rng, y, x, true)));

    const FiniteSpace m = indexed_space("m", 1 + rng.below(3));
    const FiniteSpace n = indexed_space("n", 1 + rng.below(3));
    const GameContext<double> ctx{
        m, n, random_dist<double>(rng, tensor(m, x), true),
        pushforward_continuation(random_kernel<double>(rng, tensor(m, y), tensor(n, y), true))};

    const double ae = autoencoder_fitness(lens, kl_fn<double>())(ctx);
    const double gb =
        generalized_bayes_fitness(lens, neg_log_density_effect(forward), kl_fn<double>())(ctx);
    const double gap = std::abs(ae - gb);
    max_gap = std::max(max_gap, gap);

    CheckResult check;
    check.name = "instance-" + std::to_string(i);
    check.pass = gap <= tol;
    check.details = Json{{"gap", gap}, {"autoencoder", ae}, {"generalized_bayes", gb}};
    report.checks.push_back(std::move(check));
  }
  report.summary = Json{{"instances", instances}, {"max_gap", max_gap}};
}

// --------------------------------------------------------------------------
// coin-mle: optimize a softmax strategy over a θ-grid against an empirical
// replay continuation; the fitted heads-probability must match the
// closed-form maximum likelihood estimate.

void run_coin_mle(const Scenario& scenario, Report& report) {
  const std::string path = "payload";
  const auto heads = uint_field(scenario.payload, path, "heads");
  const auto flips = uint_field(scenario.payload, path, "flips");
  if (flips == 0 || heads > flips) {
    throw SchemaError(path + ".heads: need flips ≥ 1 and heads ≤ flips");
  }
  const Json& grid = field(scenario.payload, path, "theta_grid");
  if (!grid.is_array() || grid.size() < 2) {
    throw SchemaError(path + ".theta_grid: expected an array of at least 2 values");
  }
  std::vector<double> thetas;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = as_number(grid[i], path + ".theta_grid[" + std::to_string(i) + "]");
    if (!(t > 0.0 && t < 1.0)) {
      throw SchemaError(path + ".theta_grid[" + std::to_string(i) + "]: must be in (0,1)");
    }
    thetas.push_back(t);
    labels.push_back(grid[i].dump());
  }
  const double tol_theta = number_or(scenario.payload, path, "tol_theta", 1e-3);

  OptimConfig config;
  const Json cfg = scenario.payload.contains("config") ? scenario.payload.at("config") : Json::object();
  config.max_iters = static_cast<int>(uint_or(cfg, path + ".config", "max_iters", 5000));
  config.tol = number_or(cfg, path + ".config", "tol", 1e-10);
  config.step = number_or(cfg, path + ".config", "step", 1.0);

  const FiniteSpace theta = FiniteSpace::make("theta", labels);
  const FiniteSpace coin = FiniteSpace::make("coin", {"H", "T"});
  std::vector<Dist<double>> rows;
  for (double t : thetas) rows.emplace_back(coin, std::vector<double>{t, 1.0 - t});
  const Kernel<double> family(theta, coin, rows);
  const auto lens = param_state_lens(family);

  const Continuation<double> continuation = build_continuation<double>(
      field(scenario.payload, path, "continuation"), path + ".continuation",
      FiniteSpace::unit(), FiniteSpace::unit(), coin, coin);
  const GameContext<double> ctx{FiniteSpace::unit(), FiniteSpace::unit(),
                                Dist<double>::uniform(theta), continuation};

  const auto objective = replay_mle_objective(lens, ctx);
  const auto result = optimize_fitness(objective, SimplexFamily(theta, 1), config);
  const auto strategy = SimplexFamily(theta, 1, result.best_params).as_dist();
  const double theta_hat = pushforward(strategy, family).weight("H");
  const double oracle = static_cast<double>(heads) / static_cast<double>(flips);

  CheckResult check;
  check.name = "theta-hat-matches-closed-form";
  check.pass = std::abs(theta_hat - oracle) <= tol_theta;
  check.details = Json{{"theta_hat", theta_hat},
                       {"closed_form", oracle},
                       {"abs_error", std::abs(theta_hat - oracle)},
                       {"iterations", result.iterations},
                       {"final_fitness", -result.best_value}};
  report.checks.push_back(std::move(check));
  Json trace = Json::array();
  for (double v : result.trace) trace.push_back(-v);  // the maximized log-likelihood
  report.summary = Json{{"iterations", result.iterations},
                        {"final_fitness", -result.best_value},
                        {"theta_hat", theta_hat},
                        {"trace", std::move(trace)}};
}

// --------------------------------------------------------------------------
// vae-1d: the linear-Gaussian backend against a grid-quadrature oracle, the
// optical chain identity, and the canonical ELBO instance.

struct QuadPosterior {
  double mean = 0.0;
  double variance = 0.0;
};

// Direct numerical integration of prior × likelihood over a fixed grid;
// deliberately ignorant of the conjugate formulas it checks.
QuadPosterior quadrature_posterior(const Gaussian1D& prior, const LinearGaussianKernel& k,
                                   double y, double lo, double hi, std::size_t points) {
  const double dx = (hi - lo) / static_cast<double>(points - 1);
  double mass = 0.0, first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    const double dp = x - prior.mean;
    const double resid = y - k.slope * x - k.intercept;
    const double w = std::exp(-dp * dp / (2.0 * prior.variance) -
                              resid * resid / (2.0 * k.noise_variance));
    mass += w;
    first += w * x;
    second += w * x * x;
  }
  QuadPosterior out;
  out.mean = first / mass;
  out.variance = second / mass - out.mean * out.mean;
  return out;
}

void run_vae_1d(const Scenario& scenario, Report& report) {
  const std::string path = "payload";
  const auto instances = uint_or(scenario.payload, path, "instances", 50);
  const double quad_tol = number_or(scenario.payload, path, "quad_tol", 1e-6);
  const double chain_tol = number_or(scenario.payload, path, "chain_tol", 1e-8);
  const double elbo_tol = number_or(scenario.payload, path, "elbo_tol", 1e-6);
  const auto quad_points = uint_or(scenario.payload, path, "quad_points", 100000);

  // conjugate update vs quadrature: means/slopes/intercepts in [−2,2], noise
  // variance in [0.1,4], prior variance in [0.1,1] so posterior mass stays
  // inside the fixed [−10,10] oracle grid
  double max_quad_dev = 0.0;
  bool quad_pass = true;
  for (std::uint64_t i = 0; i < instances; ++i) {
    SplitMix64 rng = instance_rng(scenario.seed, i);
    const Gaussian1D prior(rng.real(-2.0, 2.0), rng.real(0.1, 1.0));
    const LinearGaussianKernel k(rng.real(-2.0, 2.0), rng.real(-2.0, 2.0), rng.real(0.1, 4.0));
    const Gaussian1D evidence = gaussian_pushforward(prior, k);
    const double y =
        evidence.mean + rng.real(-2.0, 2.0) * std::min(std::sqrt(evidence.variance), 1.0);
    const auto exact = gaussian_invert(prior, k, y);
    const auto quad = quadrature_posterior(prior, k, y, -10.0, 10.0, quad_points);
    const double dev =
        std::max(std::abs(exact.mean - quad.mean), std::abs(exact.variance - quad.variance));
    max_quad_dev = std::max(max_quad_dev, dev);
    quad_pass = quad_pass && dev <= quad_tol;
  }
  report.checks.push_back(CheckResult{"conjugate-vs-quadrature", quad_pass,
                                      Json{{"instances", instances},
                                           {"max_deviation", max_quad_dev},
                                           {"tol", quad_tol}}});

  // optical inversion of two-stage chains vs direct conjugate inversion
  double max_chain_dev = 0.0;
  bool chain_pass = true;
  for (std::uint64_t i = 0; i < instances; ++i) {
    SplitMix64 rng = instance_rng(scenario.seed ^ 0x5bd1e995u, i);
    const Gaussian1D prior(rng.real(-2.0, 2.0), rng.real(0.1, 1.0));
    const LinearGaussianKernel k1(rng.real(-2.0, 2.0), rng.real(-2.0, 2.0), rng.real(0.1, 4.0));
    const LinearGaussianKernel k2(rng.real(-2.0, 2.0), rng.real(-2.0, 2.0), rng.real(0.1, 4.0));
    const double z = rng.real(-2.0, 2.0);
    const auto direct = gaussian_invert(prior, compose(k1, k2), z);
    const auto optical = gaussian_lens_composite_invert(prior, k1, k2, z);
    const double dev =
        std::max(std::abs(direct.mean - optical.mean), std::abs(direct.variance - optical.variance));
    max_chain_dev = std::max(max_chain_dev, dev);
    chain_pass = chain_pass && dev <= chain_tol;
  }
  report.checks.push_back(CheckResult{"optical-chain-inversion", chain_pass,
                                      Json{{"instances", instances},
                                           {"max_deviation", max_chain_dev},
                                           {"tol", chain_tol}}});

  // canonical ELBO instance: prior N(0,1), unit noise, observe y = 2
  const Gaussian1D prior(0.0, 1.0);
  const LinearGaussianKernel unit_noise(1.0, 0.0, 1.0);
  const auto elbo = gaussian_elbo_optimize(prior, unit_noise, 2.0, Gaussian1D(0.0, 1.0));
  const double neg_log_evidence = -gaussian_log_density(Gaussian1D(0.0, 2.0), 2.0);
  const double evidence_gap = std::abs(elbo.final_free_energy - neg_log_evidence);
  const bool elbo_pass = evidence_gap <= elbo_tol && std::abs(elbo.q.mean - 1.0) <= 1e-3 &&
                         std::abs(elbo.q.variance - 0.5) <= 1e-3;
  report.checks.push_back(CheckResult{"elbo-canonical-instance", elbo_pass,
                                      Json{{"mean", elbo.q.mean},
                                           {"variance", elbo.q.variance},
                                           {"free_energy", elbo.final_free_energy},
                                           {"neg_log_evidence", neg_log_evidence},
                                           {"gap", evidence_gap},
                                           {"iterations", elbo.iterations}}});

  Json trace = Json::array();
  for (double v : elbo.trace) trace.push_back(v);
  report.summary = Json{{"instances", instances},
                        {"max_quadrature_deviation", max_quad_dev},
                        {"max_chain_deviation", max_chain_dev},
                        {"elbo_gap", evidence_gap},
                        {"trace", std::move(trace)}};
}

// --------------------------------------------------------------------------
// game-pipeline: build games from serialized lenses and fitness specs,
// compose them sequentially, and check fitness additivity (plus
// associativity for three or more stages) in the given context.

template <typename R>
FitnessFn<R> build_fitness(const Json& spec, const std::string& path, const BayesianLens<R>& lens) {
  const std::string kind = as_string(field(spec, path, "kind"), path + ".kind");
  DivergenceFn<R> divergence;
  if (kind != "mle") {
    const std::string d = as_string(field(spec, path, "divergence"), path + ".divergence");
    if (d == "kl") {
      divergence = kl_fn<R>();
    } else if (d == "tv") {
      divergence = tv_fn<R>();
    } else {
      throw SchemaError(path + ".divergence: unknown divergence \"" + d + "\"");
    }
  }
  if (kind == "mle") {
    if (!lens.dom().is_unit()) {
      throw SchemaError(path + ": mle fitness needs a state lens (domain I)");
    }
    return mle_fitness(lens.forward().row(0), [](double p) { return std::log(p); });
  }
  if (kind == "bayes") return bayes_inference_fitness(lens, divergence);
  if (kind == "autoencoder") return autoencoder_fitness(lens, divergence);
  if (kind == "genbayes") {
    return generalized_bayes_fitness(lens, neg_log_density_effect(lens.forward()), divergence);
  }
  throw SchemaError(path + ".kind: unknown fitness kind \"" + kind + "\"");
}

template <typename R>
void run_game_pipeline(const Scenario& scenario, Report& report) {
  const std::string path = "payload";
  // single-game form {"lens", "fitness", "context"} or multi-stage form
  // {"stages": [{"lens", "fitness"}, ...], "context"}
  Json stages;
  if (scenario.payload.contains("stages")) {
    stages = scenario.payload.at("stages");
  } else {
    stages = Json::array({Json{{"lens", field(scenario.payload, path, "lens")},
                               {"fitness", field(scenario.payload, path, "fitness")}}});
  }
  if (!stages.is_array() || stages.empty()) {
    throw SchemaError(path + ".stages: expected a non-empty array");
  }
  const double tol = check_tol(scenario.payload, path, 1e-9);

  std::vector<StatGame<R>> games;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const std::string p = path + ".stages[" + std::to_string(i) + "]";
    BayesianLens<R> lens = [&] {
      try {
        return lens_from_json<R>(field(stages[i], p, "lens"));
      } catch (const SchemaError&) {
        throw;
      } catch (const Error& e) {
        throw SchemaError(p + ".lens: " + e.what());
      }
    }();
    FitnessFn<R> fitness = build_fitness<R>(field(stages[i], p, "fitness"), p + ".fitness", lens);
    games.push_back(StatGame<R>{std::move(lens), std::move(fitness)});
    if (i > 0 && games[i].lens.dom() != games[i - 1].lens.cod()) {
      throw SchemaError(p + ".lens: stage does not compose with the previous one");
    }
  }

  const Json& ctx_json = field(scenario.payload, path, "context");
  const Json& residual = field(ctx_json, path + ".context", "residual");
  if (!residual.is_array() || residual.size() != 2) {
    throw SchemaError(path + ".context.residual: expected [M, N]");
  }
  const FiniteSpace m = space_from_json(residual[0], "M");
  const FiniteSpace n = space_from_json(residual[1], "N");
  Dist<R> prior = [&] {
    try {
      return dist_from_json<R>(field(ctx_json, path + ".context", "prior"), "prior");
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& e) {
      throw SchemaError(path + ".context.prior: " + std::string(e.what()));
    }
  }();
  if (prior.space() != tensor(m, games.front().lens.dom())) {
    throw SchemaError(path + ".context.prior: must live on M⊗X of the first stage");
  }

  StatGame<R> composite = games.front();
  for (std::size_t i = 1; i < games.size(); ++i) composite = game_compose(composite, games[i]);

  const Continuation<R> continuation = build_continuation<R>(
      field(ctx_json, path + ".context", "continuation"), path + ".context.continuation", m, n,
      composite.lens.cod(), composite.lens.bwd_dom());
  const GameContext<R> ctx{m, n, std::move(prior), continuation};

  // composite fitness vs an explicitly expanded local sum: peel stages left
  // to right, pulling the composed tail back into each stage's context and
  // pushing the stage forward afterwards. This evaluates the locals along a
  // different route than the recursive game_compose structure.
  const double composite_fitness = composite.fitness(ctx);
  std::vector<double> locals;
  {
    GameContext<R> current = ctx;
    for (std::size_t i = 0; i < games.size(); ++i) {
      if (i + 1 < games.size()) {
        BayesianLens<R> tail = games.back().lens;
        for (std::size_t j = games.size() - 1; j-- > i + 1;) {
          tail = lens_compose(games[j].lens, tail);
        }
        locals.push_back(games[i].fitness(local_ctx_seq_first(current, tail)));
        current = local_ctx_seq_second(current, games[i].lens);
      } else {
        locals.push_back(games[i].fitness(current));
      }
    }
  }
  double local_sum = 0.0;
  for (double v : locals) local_sum += v;
  const double additivity_gap = std::abs(composite_fitness - local_sum);
  report.checks.push_back(CheckResult{"fitness-additivity", additivity_gap <= tol,
                                      Json{{"composite_fitness", composite_fitness},
                                           {"local_fitnesses", locals},
                                           {"gap", additivity_gap}}});

  if (games.size() >= 3) {
    StatGame<R> right = games.back();
    for (std::size_t i = games.size() - 1; i-- > 0;) right = game_compose(games[i], right);
    const double right_fitness = right.fitness(ctx);
    const double assoc_gap = std::abs(right_fitness - composite_fitness);
    report.checks.push_back(CheckResult{"fitness-associativity", assoc_gap <= tol,
                                        Json{{"left_fold", composite_fitness},
                                             {"right_fold", right_fitness},
                                             {"gap", assoc_gap}}});
  }

  const Dist<R> efb = feedback(ctx, composite.lens);
  report.summary = Json{{"stages", games.size()},
                        {"composite_fitness", composite_fitness},
                        {"feedback", dist_to_json(efb)}};
}

}  // namespace

// --------------------------------------------------------------------------

const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds = {
      "compose-check", "eubo-check",    "helmholtz-check", "genbayes-coincidence",
      "coin-mle",      "vae-1d",        "game-pipeline"};
  return kinds;
}

Scenario parse_scenario(const Json& j, const std::string& id) {
  if (!j.is_object()) throw SchemaError("$: scenario must be a JSON object");
  Scenario s;
  s.id = id;
  s.kind = as_string(field(j, "$", "kind"), "$.kind");
  const auto& kinds = scenario_kinds();
  if (std::find(kinds.begin(), kinds.end(), s.kind) == kinds.end()) {
    throw SchemaError("$.kind: unknown scenario kind \"" + s.kind + "\"");
  }
  s.seed = uint_field(j, "$", "seed");
  s.mode = as_string(field(j, "$", "mode"), "$.mode");
  if (s.mode != "rational" && s.mode != "float") {
    throw SchemaError("$.mode: expected \"rational\" or \"float\"");
  }
  const Json& payload = field(j, "$", "payload");
  if (!payload.is_object()) throw SchemaError("$.payload: expected an object");
  s.payload = payload;
  return s;
}

Report run_scenario(const Scenario& scenario) {
  Report report;
  report.scenario_id = scenario.id;
  report.kind = scenario.kind;
  report.seed = scenario.seed;
  report.mode = scenario.mode;

  const auto start = std::chrono::steady_clock::now();
  const bool rational = scenario.mode == "rational";
  if (scenario.kind == "compose-check") {
    rational ? run_compose_check<Rat>(scenario, report)
             : run_compose_check<double>(scenario, report);
  } else if (scenario.kind == "eubo-check") {
    run_eubo_check(scenario, report);
  } else if (scenario.kind == "helmholtz-check") {
    run_helmholtz_check(scenario, report);
  } else if (scenario.kind == "genbayes-coincidence") {
    run_genbayes_coincidence(scenario, report);
  } else if (scenario.kind == "coin-mle") {
    run_coin_mle(scenario, report);
  } else if (scenario.kind == "vae-1d") {
    run_vae_1d(scenario, report);
  } else if (scenario.kind == "game-pipeline") {
    rational ? run_game_pipeline<Rat>(scenario, report)
             : run_game_pipeline<double>(scenario, report);
  } else {
    throw SchemaError("$.kind: unknown scenario kind \"" + scenario.kind + "\"");
  }

  report.pass = true;
  for (const auto& check : report.checks) report.pass = report.pass && check.pass;
  report.wall_time_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return report;
}

Json Report::to_json() const {
  Json checks_json = Json::array();
  for (const auto& check : checks) {
    Json c = Json{{"name", check.name}, {"pass", check.pass}};
    for (const auto& [key, value] : check.details.items()) c[key] = value;
    checks_json.push_back(std::move(c));
  }
  return Json{{"report_version", kReportVersion},
              {"scenario", scenario_id},
              {"kind", kind},
              {"seed", seed},
              {"mode", mode},
              {"checks", checks_json},
              {"summary", summary},
              {"pass", pass},
              {"wall_time_ms", wall_time_ms}};
}

Json generate_scenario(const std::string& kind, const Json& params, std::uint64_t seed) {
  const std::string path = "params";
  Json payload = Json::object();
  std::string mode = "float";

  if (kind == "compose-check") {
    mode = "rational";
    Json spaces = params.contains("spaces") ? params.at("spaces") : Json{4, 5, 3};
    size_array(spaces, path + ".spaces", 3);
    payload = Json{{"spaces", spaces},
                   {"instances", uint_or(params, path, "instances", 200)}};
  } else if (kind == "eubo-check" || kind == "helmholtz-check" || kind == "genbayes-coincidence") {
    payload = Json{{"x_size", uint_or(params, path, "x_size", 4)},
                   {"y_size", uint_or(params, path, "y_size", 3)},
                   {"instances", uint_or(params, path, "instances", 100)},
                   {"tol", 1e-12}};
  } else if (kind == "coin-mle") {
    const std::uint64_t heads = uint_or(params, path, "heads", 7);
    const std::uint64_t flips = uint_or(params, path, "flips", 10);
    if (flips == 0 || heads > flips) {
      throw SchemaError(path + ".heads: need flips ≥ 1 and heads ≤ flips");
    }
    const double freq = static_cast<double>(heads) / static_cast<double>(flips);
    payload = Json{
        {"heads", heads},
        {"flips", flips},
        {"theta_grid", {0.1, 0.3, 0.5, 0.7, 0.9}},
        {"continuation",
         Json{{"name", "empirical-replay"},
              {"args", Json{{"state", Json{{"space", {"H", "T"}},
                                           {"weights", Json{{"H", freq}, {"T", 1.0 - freq}}}}}}}}},
        {"config", Json{{"max_iters", 5000}, {"tol", 1e-10}, {"step", 1.0}}},
        {"tol_theta", 1e-3}};
  } else if (kind == "vae-1d") {
    payload = Json{{"instances", uint_or(params, path, "instances", 50)},
                   {"quad_tol", 1e-6},
                   {"chain_tol", 1e-8},
                   {"elbo_tol", 1e-6},
                   {"quad_points", 100000},
                   {"ranges",
                    Json{{"mean_slope_intercept", {-2.0, 2.0}},
                         {"noise_variance", {0.1, 4.0}},
                         {"prior_variance", {0.1, 1.0}}}}};
  } else if (kind == "game-pipeline") {
    mode = "rational";
    const std::size_t nx = uint_or(params, path, "x_size", 3);
    const std::size_t ny = uint_or(params, path, "y_size", 3);
    const std::size_t nz = uint_or(params, path, "z_size", 2);
    SplitMix64 rng(seed);
    const FiniteSpace x = indexed_space("x", nx);
    const FiniteSpace y = indexed_space("y", ny);
    const FiniteSpace z = indexed_space("z", nz);
    const auto c = random_kernel<Rat>(rng, x, y, true);
    const auto d = random_kernel<Rat>(rng, y, z, true);
    const auto prior = random_dist<Rat>(rng, x, true);
    payload = Json{
        {"stages",
         Json::array({Json{{"lens", exact_lens_to_json(exact_lens(c))},
                           {"fitness", Json{{"kind", "autoencoder"}, {"divergence", "kl"}}}},
                      Json{{"lens", exact_lens_to_json(exact_lens(d))},
                           {"fitness", Json{{"kind", "bayes"}, {"divergence", "kl"}}}}})},
        {"context", Json{{"residual", Json::array({Json::array(), Json::array()})},
                         {"prior", dist_to_json(prior)},
                         {"continuation", Json{{"name", "resample-from-evidence"}}}}},
        {"tol", 1e-9}};
  } else {
    throw SchemaError("$.kind: unknown scenario kind \"" + kind + "\"");
  }

  return Json{{"kind", kind}, {"seed", seed}, {"mode", mode}, {"payload", payload}};
}

}  // namespace statlens

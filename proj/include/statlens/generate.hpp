#pragma once

#include <string>

#include "statlens/kernel.hpp"
#include "statlens/rng.hpp"

namespace statlens {

// Deterministic random instances for verification sweeps. Rational weights
// are drawn as k/64 and normalized, keeping exact-mode arithmetic small.

inline FiniteSpace indexed_space(const std::string& label, std::size_t n) {
  std::vector<std::string> outcomes;
  outcomes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) outcomes.push_back(label + std::to_string(i));
  return FiniteSpace::make(label, std::move(outcomes));
}

template <typename R>
Dist<R> random_dist(SplitMix64& rng, const FiniteSpace& space, bool positive = false) {
  std::vector<R> w(space.size());
  if constexpr (num_traits<R>::exact) {
    boost::multiprecision::cpp_int total = 0;
    for (auto& x : w) {
      const std::uint64_t k = positive ? 1 + rng.below(64) : rng.below(65);
      x = Rat(k);
      total += k;
    }
    if (total == 0) {
      w[rng.below(w.size())] = Rat(1);
      total = 1;
    }
    for (auto& x : w) x /= Rat(total);
  } else {
    double total = 0.0;
    for (auto& x : w) {
      x = positive ? 0.05 + rng.real01() : rng.real01();
      total += x;
    }
    for (auto& x : w) x /= total;
  }
  return Dist<R>(space, std::move(w));
}

template <typename R>
Kernel<R> random_kernel(SplitMix64& rng, const FiniteSpace& dom, const FiniteSpace& cod,
                        bool positive = false) {
  std::vector<Dist<R>> rows;
  rows.reserve(dom.size());
  for (std::size_t i = 0; i < dom.size(); ++i) rows.push_back(random_dist<R>(rng, cod, positive));
  return Kernel<R>(dom, cod, std::move(rows));
}

// Per-instance generator stream: instances are independent of each other, so
// a suite can verify them concurrently and still assemble an ordered report.
inline SplitMix64 instance_rng(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mixer(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
  mixer.next();
  return mixer;
}

}  // namespace statlens

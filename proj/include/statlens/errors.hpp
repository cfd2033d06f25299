#pragma once

#include <stdexcept>
#include <string>

namespace statlens {

// Base class for all statlens errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An outcome label (or index) that does not belong to the space at hand.
struct UnknownOutcome : Error {
  using Error::Error;
};

// Domain/codomain or space disagreement between composed values.
struct SpaceMismatch : Error {
  using Error::Error;
};

// A marginal was requested of a distribution on a non-product space.
struct NotAProductSpace : Error {
  using Error::Error;
};

// A posterior (or other partial kernel row) was read at an observation
// with zero evidence, where no row is defined.
struct UnsupportedObservation : Error {
  using Error::Error;
};

// The numerical optimizer could not find any finite-fitness step.
struct DivergedFitness : Error {
  using Error::Error;
};

// Malformed distribution/kernel/effect data (negative weight, bad sum, ...).
struct InvalidValue : Error {
  using Error::Error;
};

}  // namespace statlens

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "statlens/errors.hpp"

namespace statlens {

// Exact rational scalar for the core (verification) mode. Arbitrary
// precision, so chains of compositions and normalizations never overflow.
using Rat = boost::multiprecision::cpp_rational;

// Numeric-mode traits shared by the templated probability types.
// R is either Rat (exact mode) or double (float mode).
template <typename R>
struct num_traits;

template <>
struct num_traits<Rat> {
  static constexpr bool exact = true;
  static Rat zero() { return Rat(0); }
  static Rat one() { return Rat(1); }
  static bool is_zero(const Rat& r) { return r == 0; }
  static bool is_negative(const Rat& r) { return r < 0; }
  static double to_double(const Rat& r) { return r.convert_to<double>(); }
};

template <>
struct num_traits<double> {
  static constexpr bool exact = false;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static bool is_zero(double r) { return r == 0.0; }
  static bool is_negative(double r) { return r < 0.0; }
  static double to_double(double r) { return r; }
};

// Parses "p/q" or "p" into an exact rational. Used by the JSON layer.
inline Rat parse_rational(const std::string& text) {
  try {
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
      return Rat(boost::multiprecision::cpp_int(text));
    }
    boost::multiprecision::cpp_int num(text.substr(0, slash));
    boost::multiprecision::cpp_int den(text.substr(slash + 1));
    if (den == 0) throw InvalidValue("rational with zero denominator: " + text);
    return Rat(num, den);
  } catch (const std::exception&) {
    throw InvalidValue("cannot parse rational: \"" + text + "\"");
  }
}

inline std::string to_string(const Rat& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace statlens

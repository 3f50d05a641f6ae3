#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

namespace itsbound {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Variable handle: index into the owning program's (or loop's) variable list.
using VarId = std::uint32_t;

inline Int num(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Int den(const Rational& q) { return boost::multiprecision::denominator(q); }

inline bool is_integer(const Rational& q) { return den(q) == 1; }

/// Floor of a rational as an integer (exact).
inline Int floor_rat(const Rational& q) {
  Int n = num(q), d = den(q);
  Int r = n / d;
  if (n < 0 && n % d != 0) r -= 1;
  return r;
}

/// Ceiling of a rational as an integer (exact).
inline Int ceil_rat(const Rational& q) {
  Int n = num(q), d = den(q);
  Int r = n / d;
  if (n > 0 && n % d != 0) r += 1;
  return r;
}

/// ceil(|q|): the coefficient/base over-approximation used throughout.
inline Int ceil_abs(const Rational& q) { return ceil_rat(abs(q)); }

inline std::string rat_str(const Rational& q) { return q.str(); }

inline Int pow_int(const Int& b, std::uint32_t e) {
  Int r = 1, x = b;
  while (e) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

inline Rational pow_rat(const Rational& b, std::uint32_t e) {
  Rational r = 1, x = b;
  while (e) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

}  // namespace itsbound

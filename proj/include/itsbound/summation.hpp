#pragma once

#include "itsbound/polyexp.hpp"
#include "itsbound/unipoly.hpp"

namespace itsbound {

/// Closed form of S(n) = sum_{i=1..n} i^a as a polynomial of degree a+1,
/// by exact Lagrange interpolation through n = 0..a+1.
inline UniPoly faulhaber(std::uint32_t a) {
  std::uint32_t m = a + 2;  // number of sample points
  std::vector<Rational> xs(m), ys(m);
  Rational acc = 0;
  for (std::uint32_t i = 0; i < m; ++i) {
    if (i > 0) acc += pow_rat(Rational(i), a);
    xs[i] = i;
    ys[i] = acc;
  }
  UniPoly result;
  for (std::uint32_t j = 0; j < m; ++j) {
    UniPoly basis = UniPoly::constant(1);
    Rational denom = 1;
    for (std::uint32_t k = 0; k < m; ++k) {
      if (k == j) continue;
      basis = basis * UniPoly{{-xs[k], 1}};
      denom *= xs[j] - xs[k];
    }
    result = result + basis * (ys[j] / denom);
  }
  return result;
}

/// Closed form of S(n) = sum_{i=1..n} i^a * b^i, exact for every n >= 0.
///
/// b = 1 reduces to the polynomial case above. Otherwise S(n) =
/// q(n)*b^n - q(0) with deg q = a; matching coefficients of
/// q(n) - q(n-1)/b = n^a gives a triangular system solved from the top.
inline PolyExp sum_power_geom(std::uint32_t a, const Rational& b) {
  PolyExp result;
  if (b == 0) return result;  // every summand vanishes
  if (b == 1) {
    UniPoly f = faulhaber(a);
    for (std::size_t i = 0; i < f.c.size(); ++i)
      if (f.c[i] != 0)
        result.terms.push_back({Polynomial::constant(f.c[i]), static_cast<std::uint32_t>(i), 1});
    result.normalize();
    return result;
  }
  std::vector<Rational> q(a + 1, 0);
  Rational gap = 1 - 1 / b;
  q[a] = 1 / gap;
  for (std::uint32_t j = a; j-- > 0;) {
    Rational rhs = 0;
    for (std::uint32_t i = j + 1; i <= a; ++i) {
      Rational sgn = ((i - j) % 2 == 0) ? 1 : -1;
      rhs += q[i] * Rational(binomial(i, j)) * sgn;
    }
    q[j] = rhs / (b * gap);
  }
  for (std::uint32_t i = 0; i <= a; ++i)
    if (q[i] != 0) result.terms.push_back({Polynomial::constant(q[i]), i, b});
  if (q[0] != 0) result.terms.push_back({Polynomial::constant(-q[0]), 0, 1});
  result.normalize();
  return result;
}

}  // namespace itsbound

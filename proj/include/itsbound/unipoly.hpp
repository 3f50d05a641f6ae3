#pragma once

#include <cassert>
#include <utility>
#include <vector>

#include "itsbound/rational.hpp"

namespace itsbound {

/// Univariate polynomial, coefficients lowest-degree first, no trailing zeros.
struct UniPoly {
  std::vector<Rational> c;

  void normalize() {
    while (!c.empty() && c.back() == 0) c.pop_back();
  }

  bool is_zero() const { return c.empty(); }
  int degree() const { return static_cast<int>(c.size()) - 1; }
  Rational lead() const { return c.empty() ? Rational(0) : c.back(); }

  Rational coeff(std::size_t i) const { return i < c.size() ? c[i] : Rational(0); }

  static UniPoly constant(const Rational& k) {
    UniPoly p;
    if (k != 0) p.c = {k};
    return p;
  }

  static UniPoly x() { return UniPoly{{0, 1}}; }

  UniPoly operator+(const UniPoly& o) const {
    UniPoly r;
    r.c.resize(std::max(c.size(), o.c.size()), 0);
    for (std::size_t i = 0; i < c.size(); ++i) r.c[i] += c[i];
    for (std::size_t i = 0; i < o.c.size(); ++i) r.c[i] += o.c[i];
    r.normalize();
    return r;
  }

  UniPoly operator-() const {
    UniPoly r = *this;
    for (auto& k : r.c) k = -k;
    return r;
  }

  UniPoly operator-(const UniPoly& o) const { return *this + (-o); }

  UniPoly operator*(const UniPoly& o) const {
    if (is_zero() || o.is_zero()) return {};
    UniPoly r;
    r.c.assign(c.size() + o.c.size() - 1, 0);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < o.c.size(); ++j) r.c[i + j] += c[i] * o.c[j];
    r.normalize();
    return r;
  }

  UniPoly operator*(const Rational& k) const {
    if (k == 0) return {};
    UniPoly r = *this;
    for (auto& q : r.c) q *= k;
    return r;
  }

  Rational eval(const Rational& x) const {
    Rational r = 0;
    for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
    return r;
  }

  UniPoly derivative() const {
    UniPoly r;
    for (std::size_t i = 1; i < c.size(); ++i) r.c.push_back(c[i] * Rational(i));
    r.normalize();
    return r;
  }

  /// p(a*x + b) by Horner over polynomial arithmetic.
  UniPoly compose_linear(const Rational& a, const Rational& b) const {
    UniPoly lin{{b, a}};
    lin.normalize();
    UniPoly r;
    for (std::size_t i = c.size(); i-- > 0;) r = r * lin + constant(c[i]);
    return r;
  }
};

/// Euclidean division: returns (quotient, remainder).
inline std::pair<UniPoly, UniPoly> uni_divmod(const UniPoly& a, const UniPoly& b) {
  assert(!b.is_zero());
  UniPoly q, r = a;
  while (!r.is_zero() && r.degree() >= b.degree()) {
    int k = r.degree() - b.degree();
    Rational f = r.lead() / b.lead();
    if (q.c.size() < static_cast<std::size_t>(k) + 1) q.c.resize(k + 1, 0);
    q.c[k] += f;
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i + k] -= f * b.c[i];
    r.normalize();
  }
  q.normalize();
  return {q, r};
}

/// Monic gcd.
inline UniPoly uni_gcd(UniPoly a, UniPoly b) {
  while (!b.is_zero()) {
    UniPoly r = uni_divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.is_zero()) {
    Rational l = a.lead();
    for (auto& k : a.c) k /= l;
  }
  return a;
}

namespace detail {

inline int sign_of(const Rational& q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); }

inline int sturm_variations(const std::vector<UniPoly>& seq, const Rational& x) {
  int var = 0, prev = 0;
  for (auto& f : seq) {
    int s = sign_of(f.eval(x));
    if (s != 0) {
      if (prev != 0 && s != prev) ++var;
      prev = s;
    }
  }
  return var;
}

}  // namespace detail

/// All integer roots of p with multiplicities. Exact for arbitrary coefficient
/// size: square-free reduction, Sturm-count bisection down to unit intervals,
/// then direct confirmation of the integer candidate.
inline std::vector<std::pair<Int, std::uint32_t>> integer_roots(const UniPoly& p) {
  assert(!p.is_zero());
  std::vector<std::pair<Int, std::uint32_t>> roots;

  UniPoly f = p;
  std::uint32_t zero_mult = 0;
  while (!f.c.empty() && f.c.front() == 0) {
    f.c.erase(f.c.begin());
    ++zero_mult;
  }
  if (zero_mult > 0) roots.push_back({0, zero_mult});
  if (f.degree() < 1) return roots;

  UniPoly g = uni_divmod(f, uni_gcd(f, f.derivative())).first;  // square-free part

  // Cauchy bound: all real roots lie in [-B, B].
  Rational maxc = 0;
  for (auto& k : g.c) maxc = std::max(maxc, Rational(abs(k)));
  Int bound = ceil_rat(Rational(1) + maxc / abs(g.lead()));

  std::vector<UniPoly> seq{g, g.derivative()};
  while (seq.back().degree() >= 1) {
    UniPoly r = uni_divmod(seq[seq.size() - 2], seq.back()).second;
    if (r.is_zero()) break;  // cannot happen for square-free input
    seq.push_back(-r);
  }

  std::vector<Int> candidates;
  std::vector<std::pair<Rational, Rational>> stack{{Rational(-bound) - 1, Rational(bound)}};
  while (!stack.empty()) {
    auto [lo, hi] = stack.back();
    stack.pop_back();
    int n = detail::sturm_variations(seq, lo) - detail::sturm_variations(seq, hi);
    if (n <= 0) continue;
    if (hi - lo < 1) {
      // At most one integer can sit in (lo, hi]; check it directly.
      Int m = floor_rat(hi);
      if (Rational(m) > lo && g.eval(Rational(m)) == 0) candidates.push_back(m);
      continue;
    }
    Rational mid = (lo + hi) / 2;
    stack.push_back({lo, mid});
    stack.push_back({mid, hi});
  }

  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (const Int& r : candidates) {
    UniPoly lin{{Rational(-r), 1}};
    std::uint32_t mult = 0;
    UniPoly rest = f;
    while (true) {
      auto [q, rem] = uni_divmod(rest, lin);
      if (!rem.is_zero()) break;
      rest = q;
      ++mult;
    }
    roots.push_back({r, mult});
  }
  std::sort(roots.begin(), roots.end(),
            [](auto& a, auto& b) { return a.first < b.first; });
  return roots;
}

/// Sum of root multiplicities found by integer_roots.
inline std::uint32_t total_multiplicity(
    const std::vector<std::pair<Int, std::uint32_t>>& roots) {
  std::uint32_t s = 0;
  for (auto& [r, m] : roots) s += m;
  return s;
}

}  // namespace itsbound

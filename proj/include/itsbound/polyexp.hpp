#pragma once

#include <cassert>
#include <optional>
#include <vector>

#include "itsbound/polynomial.hpp"

namespace itsbound {

/// One summand alpha(vars) * n^a * b^n of a poly-exponential expression.
/// The iteration counter n is implicit and distinct from program variables.
struct PolyExpTerm {
  Polynomial alpha;
  std::uint32_t a = 0;
  Rational b = 1;
};

/// Poly-exponential expression: sum of terms, valid for n >= n0.
/// Invariant: terms are sorted by (b, a), pairs (b, a) are unique, and no
/// alpha is zero.
struct PolyExp {
  std::vector<PolyExpTerm> terms;
  std::uint32_t n0 = 0;

  void normalize() {
    std::sort(terms.begin(), terms.end(), [](const PolyExpTerm& s, const PolyExpTerm& t) {
      return s.b < t.b || (s.b == t.b && s.a < t.a);
    });
    std::vector<PolyExpTerm> out;
    for (auto& t : terms) {
      if (t.alpha.is_zero()) continue;
      if (!out.empty() && out.back().b == t.b && out.back().a == t.a) {
        out.back().alpha = out.back().alpha + t.alpha;
        if (out.back().alpha.is_zero()) out.pop_back();
      } else {
        out.push_back(t);
      }
    }
    terms = std::move(out);
  }

  static PolyExp from_poly(const Polynomial& p, std::uint32_t n0 = 0) {
    PolyExp e;
    e.n0 = n0;
    if (!p.is_zero()) e.terms.push_back({p, 0, 1});
    return e;
  }

  static PolyExp zero() { return {}; }

  bool is_zero() const { return terms.empty(); }

  /// True when the expression is a polynomial in n (every base is 1).
  bool is_poly_in_n() const {
    for (auto& t : terms)
      if (t.b != 1) return false;
    return true;
  }

  /// Coefficient polynomials per power of n, when the expression is
  /// polynomial in n.
  std::optional<std::vector<Polynomial>> poly_in_n_coeffs() const {
    if (!is_poly_in_n()) return std::nullopt;
    std::vector<Polynomial> c;
    for (auto& t : terms) {
      if (c.size() <= t.a) c.resize(t.a + 1);
      c[t.a] = c[t.a] + t.alpha;
    }
    while (!c.empty() && c.back().is_zero()) c.pop_back();
    return c;
  }

  std::uint32_t max_total_degree() const {
    std::uint32_t d = 0;
    for (auto& t : terms) d = std::max(d, t.alpha.degree() + t.a);
    return d;
  }

  PolyExp operator+(const PolyExp& o) const {
    PolyExp r;
    r.n0 = std::max(n0, o.n0);
    r.terms = terms;
    r.terms.insert(r.terms.end(), o.terms.begin(), o.terms.end());
    r.normalize();
    return r;
  }

  PolyExp operator*(const PolyExp& o) const {
    PolyExp r;
    r.n0 = std::max(n0, o.n0);
    for (auto& s : terms)
      for (auto& t : o.terms)
        r.terms.push_back({s.alpha * t.alpha, s.a + t.a, s.b * t.b});
    r.normalize();
    return r;
  }

  PolyExp operator*(const Rational& k) const {
    PolyExp r = *this;
    for (auto& t : r.terms) t.alpha = t.alpha * k;
    r.normalize();
    return r;
  }

  PolyExp scaled_by_poly(const Polynomial& p) const {
    PolyExp r = *this;
    for (auto& t : r.terms) t.alpha = t.alpha * p;
    r.normalize();
    return r;
  }

  bool operator==(const PolyExp& o) const {
    if (n0 != o.n0 || terms.size() != o.terms.size()) return false;
    for (std::size_t i = 0; i < terms.size(); ++i)
      if (terms[i].a != o.terms[i].a || terms[i].b != o.terms[i].b ||
          !(terms[i].alpha == o.terms[i].alpha))
        return false;
    return true;
  }
};

/// Exact value at (state, n), with 0^0 = 1.
inline Rational polyexp_eval(const PolyExp& e, const std::vector<Rational>& state,
                             std::uint32_t n) {
  Rational r = 0;
  for (auto& t : e.terms) {
    if (t.b == 0 && n > 0) continue;
    Rational v = poly_eval(t.alpha, state);
    v *= pow_rat(Rational(n), t.a);
    if (t.b != 0) v *= pow_rat(t.b, n);
    r += v;
  }
  return r;
}

inline Rational polyexp_eval(const PolyExp& e, const std::vector<Int>& state,
                             std::uint32_t n) {
  std::vector<Rational> s(state.begin(), state.end());
  return polyexp_eval(e, s, n);
}

/// Value at a fixed n, kept symbolic in the program variables.
inline Polynomial polyexp_at(const PolyExp& e, std::uint32_t n) {
  Polynomial r;
  for (auto& t : e.terms) {
    if (t.b == 0 && n > 0) continue;
    Rational c = pow_rat(Rational(n), t.a);
    if (t.b != 0) c *= pow_rat(t.b, n);
    r = r + t.alpha * c;
  }
  return r;
}

/// Substitute polynomials for program variables inside all coefficients.
inline PolyExp polyexp_subst_vars(const PolyExp& e, const std::vector<Polynomial>& subst) {
  PolyExp r;
  r.n0 = e.n0;
  for (auto& t : e.terms) r.terms.push_back({poly_compose(t.alpha, subst), t.a, t.b});
  r.normalize();
  return r;
}

inline Int binomial(std::uint32_t n, std::uint32_t k) {
  if (k > n) return 0;
  Int r = 1;
  for (std::uint32_t i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

/// n -> n - k. Requires every base to be nonzero; zero-base terms encode
/// point corrections at n = 0 and must be handled by the caller.
inline PolyExp polyexp_shift_n(const PolyExp& e, std::uint32_t k) {
  PolyExp r;
  r.n0 = e.n0 + k;
  for (auto& t : e.terms) {
    assert(t.b != 0);
    Rational scale = 1 / pow_rat(t.b, k);  // b^(n-k) = b^n / b^k
    for (std::uint32_t i = 0; i <= t.a; ++i) {
      Rational c = Rational(binomial(t.a, i)) * pow_rat(Rational(-Rational(k)), t.a - i);
      r.terms.push_back({t.alpha * (c * scale), i, t.b});
    }
  }
  r.normalize();
  return r;
}

/// Coefficients -> ceil(|c|), bases -> ceil(|b|). The result dominates |e|
/// pointwise over non-negative states and is weakly monotone.
inline PolyExp ceil_abs_polyexp(const PolyExp& e) {
  PolyExp r;
  r.n0 = e.n0;
  for (auto& t : e.terms) {
    Polynomial a;
    for (auto& [m, c] : t.alpha.terms) a.add_term(m, Rational(ceil_abs(c)));
    r.terms.push_back({a, t.a, Rational(ceil_abs(t.b))});
  }
  r.normalize();
  return r;
}

inline std::string polyexp_str(const PolyExp& e, const std::vector<std::string>& names) {
  if (e.terms.empty()) return "0";
  std::string out;
  for (auto& t : e.terms) {
    if (!out.empty()) out += " + ";
    out += "(" + poly_str(t.alpha, names) + ")";
    if (t.a > 0) out += "*n" + (t.a > 1 ? "^" + std::to_string(t.a) : "");
    if (t.b != 1) out += "*(" + rat_str(t.b) + ")^n";
  }
  if (e.n0 > 0) out += "  [n>=" + std::to_string(e.n0) + "]";
  return out;
}

}  // namespace itsbound

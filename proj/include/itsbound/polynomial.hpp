#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "itsbound/rational.hpp"

namespace itsbound {

/// Sorted sparse exponent vector; empty means the constant monomial.
struct Monomial {
  std::vector<std::pair<VarId, std::uint32_t>> exps;

  bool operator<(const Monomial& o) const { return exps < o.exps; }
  bool operator==(const Monomial& o) const { return exps == o.exps; }

  std::uint32_t total_degree() const {
    std::uint32_t d = 0;
    for (auto& [v, e] : exps) d += e;
    return d;
  }

  std::uint32_t degree_in(VarId v) const {
    for (auto& [w, e] : exps)
      if (w == v) return e;
    return 0;
  }

  static Monomial one() { return {}; }

  static Monomial var(VarId v, std::uint32_t e = 1) {
    Monomial m;
    if (e > 0) m.exps.push_back({v, e});
    return m;
  }

  Monomial operator*(const Monomial& o) const {
    Monomial r;
    auto a = exps.begin(), b = o.exps.begin();
    while (a != exps.end() || b != o.exps.end()) {
      if (b == o.exps.end() || (a != exps.end() && a->first < b->first))
        r.exps.push_back(*a++);
      else if (a == exps.end() || b->first < a->first)
        r.exps.push_back(*b++);
      else {
        r.exps.push_back({a->first, a->second + b->second});
        ++a, ++b;
      }
    }
    return r;
  }
};

/// Multivariate polynomial with exact rational coefficients.
/// Invariant: no zero coefficients are stored.
class Polynomial {
 public:
  std::map<Monomial, Rational> terms;

  Polynomial() = default;

  static Polynomial constant(const Rational& c) {
    Polynomial p;
    if (c != 0) p.terms[Monomial::one()] = c;
    return p;
  }

  static Polynomial var(VarId v) {
    Polynomial p;
    p.terms[Monomial::var(v)] = 1;
    return p;
  }

  static Polynomial monomial(const Rational& c, const Monomial& m) {
    Polynomial p;
    if (c != 0) p.terms[m] = c;
    return p;
  }

  bool is_zero() const { return terms.empty(); }

  bool is_constant() const {
    return terms.empty() || (terms.size() == 1 && terms.begin()->first.exps.empty());
  }

  Rational constant_term() const {
    auto it = terms.find(Monomial::one());
    return it == terms.end() ? Rational(0) : it->second;
  }

  /// Coefficient of the plain degree-1 monomial of v.
  Rational linear_coeff(VarId v) const {
    auto it = terms.find(Monomial::var(v));
    return it == terms.end() ? Rational(0) : it->second;
  }

  Rational coeff(const Monomial& m) const {
    auto it = terms.find(m);
    return it == terms.end() ? Rational(0) : it->second;
  }

  std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (auto& [m, c] : terms) d = std::max(d, m.total_degree());
    return d;
  }

  std::uint32_t degree_in(VarId v) const {
    std::uint32_t d = 0;
    for (auto& [m, c] : terms) d = std::max(d, m.degree_in(v));
    return d;
  }

  bool is_linear() const { return degree() <= 1; }

  bool mentions(VarId v) const {
    for (auto& [m, c] : terms)
      if (m.degree_in(v) > 0) return true;
    return false;
  }

  std::set<VarId> vars() const {
    std::set<VarId> s;
    for (auto& [m, c] : terms)
      for (auto& [v, e] : m.exps) s.insert(v);
    return s;
  }

  void add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, fresh] = terms.try_emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) terms.erase(it);
    }
  }

  Polynomial operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (auto& [m, c] : o.terms) r.add_term(m, c);
    return r;
  }

  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& [m, c] : r.terms) c = -c;
    return r;
  }

  Polynomial operator-(const Polynomial& o) const { return *this + (-o); }

  Polynomial operator*(const Polynomial& o) const {
    Polynomial r;
    for (auto& [m1, c1] : terms)
      for (auto& [m2, c2] : o.terms) r.add_term(m1 * m2, c1 * c2);
    return r;
  }

  Polynomial operator*(const Rational& c) const {
    Polynomial r;
    if (c == 0) return r;
    r = *this;
    for (auto& [m, k] : r.terms) k *= c;
    return r;
  }

  Polynomial pow(std::uint32_t e) const {
    Polynomial r = constant(1), x = *this;
    while (e) {
      if (e & 1) r = r * x;
      if (e >>= 1) x = x * x;
    }
    return r;
  }

  bool operator==(const Polynomial& o) const { return terms == o.terms; }
  bool operator!=(const Polynomial& o) const { return !(*this == o); }
};

inline Polynomial operator*(const Rational& c, const Polynomial& p) { return p * c; }

/// Exact evaluation at a total assignment (indexed by VarId).
inline Rational poly_eval(const Polynomial& p, const std::vector<Rational>& state) {
  Rational r = 0;
  for (auto& [m, c] : p.terms) {
    Rational t = c;
    for (auto& [v, e] : m.exps) {
      if (v >= state.size()) throw std::out_of_range("poly_eval: variable outside state");
      t *= pow_rat(state[v], e);
    }
    r += t;
  }
  return r;
}

inline Rational poly_eval(const Polynomial& p, const std::vector<Int>& state) {
  std::vector<Rational> s(state.begin(), state.end());
  return poly_eval(p, s);
}

/// Simultaneous substitution v -> subst[v]; entries outside the map stay put.
inline Polynomial poly_compose(const Polynomial& p,
                               const std::map<VarId, Polynomial>& subst) {
  Polynomial r;
  for (auto& [m, c] : p.terms) {
    Polynomial t = Polynomial::constant(c);
    for (auto& [v, e] : m.exps) {
      auto it = subst.find(v);
      Polynomial base = it == subst.end() ? Polynomial::var(v) : it->second;
      t = t * base.pow(e);
    }
    r = r + t;
  }
  return r;
}

/// Substitution with a total update vector (index = VarId).
inline Polynomial poly_compose(const Polynomial& p, const std::vector<Polynomial>& subst) {
  Polynomial r;
  for (auto& [m, c] : p.terms) {
    Polynomial t = Polynomial::constant(c);
    for (auto& [v, e] : m.exps) {
      if (v >= subst.size()) throw std::out_of_range("poly_compose: variable outside update");
      t = t * subst[v].pow(e);
    }
    r = r + t;
  }
  return r;
}

/// Coefficient-wise absolute value. Monotone over non-negative states and
/// dominates |p| pointwise; rendering into the bound language ceils what is
/// left fractional.
inline Polynomial abs_poly(const Polynomial& p) {
  Polynomial r;
  for (auto& [m, c] : p.terms) r.terms[m] = abs(c);
  return r;
}

inline std::string poly_str(const Polynomial& p,
                            const std::vector<std::string>& names) {
  if (p.terms.empty()) return "0";
  std::string out;
  auto emit = [&](const Monomial& m, const Rational& c) {
    Rational a = abs(c);
    bool neg = c < 0;
    if (out.empty()) {
      if (neg) out += "-";
    } else {
      out += neg ? "-" : "+";
    }
    std::string factors;
    for (auto& [v, e] : m.exps) {
      if (!factors.empty()) factors += "*";
      std::string nm = v < names.size() ? names[v] : ("v" + std::to_string(v));
      factors += nm;
      if (e > 1) factors += "^" + std::to_string(e);
    }
    if (factors.empty()) {
      out += rat_str(a);
    } else {
      if (a != 1) out += rat_str(a) + "*";
      out += factors;
    }
  };
  // Non-constant monomials in canonical order, constant term last.
  for (auto& [m, c] : p.terms)
    if (!m.exps.empty()) emit(m, c);
  Rational k = p.constant_term();
  if (k != 0 || p.terms.size() == 0) emit(Monomial::one(), k);
  return out;
}

}  // namespace itsbound

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "itsbound/polyexp.hpp"
#include "itsbound/polynomial.hpp"

namespace itsbound {

/// Weakly monotone bound expressions over naturals, omega, variables,
/// +, *, and k^e with a constant natural base. Upper bounds on |values|
/// are closed under substituting one bound into another, which is what
/// the whole lifting machinery relies on.
struct BoundExpr {
  enum class Kind { Nat, Omega, Var, Sum, Prod, Pow };

  Kind kind = Kind::Nat;
  Int nat = 0;   // Kind::Nat value, Kind::Pow base
  VarId var = 0; // Kind::Var
  std::vector<BoundExpr> kids;  // Sum/Prod children; Pow: single exponent child

  bool is_nat(const Int& v) const { return kind == Kind::Nat && nat == v; }
};

inline BoundExpr b_nat(Int v) {
  BoundExpr b;
  b.kind = BoundExpr::Kind::Nat;
  if (v < 0) throw std::invalid_argument("bound constant must be a natural");
  b.nat = std::move(v);
  return b;
}

inline BoundExpr b_omega() {
  BoundExpr b;
  b.kind = BoundExpr::Kind::Omega;
  return b;
}

inline BoundExpr b_var(VarId v) {
  BoundExpr b;
  b.kind = BoundExpr::Kind::Var;
  b.var = v;
  return b;
}

inline BoundExpr b_sum(std::vector<BoundExpr> kids) {
  BoundExpr b;
  b.kind = BoundExpr::Kind::Sum;
  b.kids = std::move(kids);
  return b;
}

inline BoundExpr b_prod(std::vector<BoundExpr> kids) {
  BoundExpr b;
  b.kind = BoundExpr::Kind::Prod;
  b.kids = std::move(kids);
  return b;
}

/// k^e. Base 0 is flattened to the constant 1: that dominates 0^e for every
/// e and keeps the expression weakly monotone. Base 1 likewise folds.
inline BoundExpr b_pow(Int base, BoundExpr exp) {
  if (base < 0) throw std::invalid_argument("bound base must be a natural");
  if (base == 0 || base == 1) return b_nat(1);
  BoundExpr b;
  b.kind = BoundExpr::Kind::Pow;
  b.nat = std::move(base);
  b.kids.push_back(std::move(exp));
  return b;
}

inline bool bound_is_omega(const BoundExpr& b) { return b.kind == BoundExpr::Kind::Omega; }

/// Structural total order used for canonical forms.
inline int bound_cmp(const BoundExpr& a, const BoundExpr& b) {
  auto rank = [](BoundExpr::Kind k) {
    switch (k) {
      case BoundExpr::Kind::Var: return 0;
      case BoundExpr::Kind::Pow: return 1;
      case BoundExpr::Kind::Sum: return 2;
      case BoundExpr::Kind::Prod: return 3;
      case BoundExpr::Kind::Nat: return 4;
      case BoundExpr::Kind::Omega: return 5;
    }
    return 6;
  };
  if (rank(a.kind) != rank(b.kind)) return rank(a.kind) < rank(b.kind) ? -1 : 1;
  switch (a.kind) {
    case BoundExpr::Kind::Var:
      return a.var < b.var ? -1 : (a.var > b.var ? 1 : 0);
    case BoundExpr::Kind::Nat:
      return a.nat < b.nat ? -1 : (a.nat > b.nat ? 1 : 0);
    case BoundExpr::Kind::Omega:
      return 0;
    default: {
      if (a.kind == BoundExpr::Kind::Pow && a.nat != b.nat)
        return a.nat < b.nat ? -1 : 1;
      std::size_t n = std::min(a.kids.size(), b.kids.size());
      for (std::size_t i = 0; i < n; ++i) {
        int c = bound_cmp(a.kids[i], b.kids[i]);
        if (c != 0) return c;
      }
      if (a.kids.size() != b.kids.size()) return a.kids.size() < b.kids.size() ? -1 : 1;
      return 0;
    }
  }
}

namespace detail {

struct BoundTerm {
  Int coeff = 1;
  std::vector<BoundExpr> factors;  // sorted, non-constant
};

inline bool factors_less(const std::vector<BoundExpr>& a, const std::vector<BoundExpr>& b) {
  // Constant term (no factors) sorts last.
  if (a.empty() != b.empty()) return b.empty();
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = bound_cmp(a[i], b[i]);
    if (c != 0) return c < 0;
  }
  return a.size() < b.size();
}

}  // namespace detail

/// Canonical form: constants folded, sums/products flattened, like terms
/// collected at the sum level, deterministic ordering. Products are not
/// distributed over sums.
inline BoundExpr bound_simplify(const BoundExpr& b) {
  using K = BoundExpr::Kind;
  switch (b.kind) {
    case K::Nat:
    case K::Omega:
    case K::Var:
      return b;
    case K::Pow: {
      BoundExpr e = bound_simplify(b.kids[0]);
      if (b.nat == 0 || b.nat == 1) return b_nat(1);
      if (bound_is_omega(e)) return b_omega();
      if (e.kind == K::Nat) {
        if (e.nat > 4096) throw std::runtime_error("bound_simplify: constant exponent blow-up");
        return b_nat(pow_int(b.nat, static_cast<std::uint32_t>(e.nat)));
      }
      BoundExpr r;
      r.kind = K::Pow;
      r.nat = b.nat;
      r.kids.push_back(std::move(e));
      return r;
    }
    case K::Prod: {
      Int c = 1;
      std::vector<BoundExpr> fs;
      std::vector<const BoundExpr*> stack;
      for (auto& k : b.kids) stack.push_back(&k);
      std::vector<BoundExpr> owned;
      owned.reserve(stack.size());
      for (std::size_t i = 0; i < stack.size(); ++i) {
        BoundExpr k = bound_simplify(*stack[i]);
        if (bound_is_omega(k)) return b_omega();
        if (k.kind == K::Nat) {
          c *= k.nat;
          if (c == 0) return b_nat(0);
        } else if (k.kind == K::Prod) {
          owned.push_back(std::move(k));
          for (auto& kk : owned.back().kids) stack.push_back(&kk);
        } else {
          fs.push_back(std::move(k));
        }
      }
      std::sort(fs.begin(), fs.end(),
                [](const BoundExpr& x, const BoundExpr& y) { return bound_cmp(x, y) < 0; });
      if (fs.empty()) return b_nat(c);
      if (c == 1 && fs.size() == 1) return fs[0];
      // a constant times a lone sum distributes, so lifted sums collect
      if (c != 1 && fs.size() == 1 && fs[0].kind == K::Sum) {
        std::vector<BoundExpr> kids;
        kids.reserve(fs[0].kids.size());
        for (auto& t : fs[0].kids) kids.push_back(b_prod({b_nat(c), t}));
        return bound_simplify(b_sum(std::move(kids)));
      }
      BoundExpr r;
      r.kind = K::Prod;
      if (c != 1) r.kids.push_back(b_nat(c));
      for (auto& f : fs) r.kids.push_back(std::move(f));
      if (r.kids.size() == 1) return r.kids[0];
      return r;
    }
    case K::Sum: {
      Int c = 0;
      std::vector<detail::BoundTerm> terms;
      std::vector<const BoundExpr*> stack;
      for (auto& k : b.kids) stack.push_back(&k);
      std::vector<BoundExpr> owned;
      owned.reserve(stack.size());
      for (std::size_t i = 0; i < stack.size(); ++i) {
        BoundExpr k = bound_simplify(*stack[i]);
        if (bound_is_omega(k)) return b_omega();
        if (k.kind == K::Nat) {
          c += k.nat;
        } else if (k.kind == K::Sum) {
          owned.push_back(std::move(k));
          for (auto& kk : owned.back().kids) stack.push_back(&kk);
        } else {
          detail::BoundTerm t;
          if (k.kind == K::Prod) {
            for (auto& f : k.kids) {
              if (f.kind == K::Nat)
                t.coeff *= f.nat;
              else
                t.factors.push_back(f);
            }
          } else {
            t.factors.push_back(std::move(k));
          }
          if (t.coeff != 0) terms.push_back(std::move(t));
        }
      }
      std::sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) {
        return detail::factors_less(x.factors, y.factors);
      });
      std::vector<detail::BoundTerm> merged;
      for (auto& t : terms) {
        if (!merged.empty() && merged.back().factors.size() == t.factors.size() &&
            !detail::factors_less(merged.back().factors, t.factors) &&
            !detail::factors_less(t.factors, merged.back().factors)) {
          merged.back().coeff += t.coeff;
        } else {
          merged.push_back(std::move(t));
        }
      }
      std::vector<BoundExpr> kids;
      for (auto& t : merged) {
        if (t.coeff == 0) continue;
        if (t.coeff == 1 && t.factors.size() == 1) {
          kids.push_back(t.factors[0]);
        } else {
          BoundExpr p;
          p.kind = K::Prod;
          if (t.coeff != 1) p.kids.push_back(b_nat(t.coeff));
          for (auto& f : t.factors) p.kids.push_back(f);
          kids.push_back(p.kids.size() == 1 ? p.kids[0] : std::move(p));
        }
      }
      if (c != 0 || kids.empty()) kids.push_back(b_nat(c));
      if (kids.size() == 1) return kids[0];
      BoundExpr r;
      r.kind = K::Sum;
      r.kids = std::move(kids);
      return r;
    }
  }
  return b;
}

/// Value over naturals with omega as absorbing top (also for products with
/// zero: the coarse reading keeps evaluation monotone).
struct NatOrOmega {
  std::optional<Int> v;  // nullopt = omega

  bool is_omega() const { return !v.has_value(); }

  static NatOrOmega omega() { return {}; }
  static NatOrOmega of(Int x) { return {std::move(x)}; }

  bool operator==(const NatOrOmega& o) const { return v == o.v; }

  /// this <= other in the order where omega is top.
  bool leq(const NatOrOmega& o) const {
    if (o.is_omega()) return true;
    if (is_omega()) return false;
    return *v <= *o.v;
  }
};

inline NatOrOmega bound_eval(const BoundExpr& b, const std::vector<Int>& state) {
  using K = BoundExpr::Kind;
  switch (b.kind) {
    case K::Nat:
      return NatOrOmega::of(b.nat);
    case K::Omega:
      return NatOrOmega::omega();
    case K::Var:
      if (b.var >= state.size()) throw std::out_of_range("bound_eval: variable outside state");
      if (state[b.var] < 0) throw std::invalid_argument("bound_eval: negative state entry");
      return NatOrOmega::of(state[b.var]);
    case K::Sum: {
      Int s = 0;
      for (auto& k : b.kids) {
        NatOrOmega r = bound_eval(k, state);
        if (r.is_omega()) return NatOrOmega::omega();
        s += *r.v;
      }
      return NatOrOmega::of(s);
    }
    case K::Prod: {
      Int s = 1;
      for (auto& k : b.kids) {
        NatOrOmega r = bound_eval(k, state);
        if (r.is_omega()) return NatOrOmega::omega();
        s *= *r.v;
      }
      return NatOrOmega::of(s);
    }
    case K::Pow: {
      NatOrOmega e = bound_eval(b.kids[0], state);
      if (e.is_omega()) return b.nat >= 2 ? NatOrOmega::omega() : NatOrOmega::of(Int(1));
      if (*e.v > 2000000) throw std::runtime_error("bound_eval: exponent too large");
      return NatOrOmega::of(pow_int(b.nat, static_cast<std::uint32_t>(*e.v)));
    }
  }
  throw std::logic_error("bound_eval: bad kind");
}

inline BoundExpr bound_subst(const BoundExpr& b, const std::map<VarId, BoundExpr>& subst) {
  using K = BoundExpr::Kind;
  switch (b.kind) {
    case K::Nat:
    case K::Omega:
      return b;
    case K::Var: {
      auto it = subst.find(b.var);
      return it == subst.end() ? b : it->second;
    }
    default: {
      BoundExpr r = b;
      for (auto& k : r.kids) k = bound_subst(k, subst);
      return r;
    }
  }
}

inline bool bound_is_finite(const BoundExpr& b) {
  if (b.kind == BoundExpr::Kind::Omega) return false;
  for (auto& k : b.kids)
    if (!bound_is_finite(k)) return false;
  return true;
}

inline bool bound_has_exp_node(const BoundExpr& b) {
  if (b.kind == BoundExpr::Kind::Pow && b.nat >= 2 &&
      b.kids[0].kind != BoundExpr::Kind::Nat)
    return true;
  for (auto& k : b.kids)
    if (bound_has_exp_node(k)) return true;
  return false;
}

enum class AsymClass { Const, Linear, Quadratic, PolyHigher, Exp, Infinite };

inline std::string asym_class_str(AsymClass c) {
  switch (c) {
    case AsymClass::Const: return "O(1)";
    case AsymClass::Linear: return "O(n)";
    case AsymClass::Quadratic: return "O(n^2)";
    case AsymClass::PolyHigher: return "O(n^>2)";
    case AsymClass::Exp: return "EXP";
    case AsymClass::Infinite: return "omega";
  }
  return "?";
}

namespace detail {
struct AsymInfo {
  bool omega = false, exp = false;
  std::uint32_t deg = 0;
};

inline AsymInfo asym_walk(const BoundExpr& b) {
  using K = BoundExpr::Kind;
  AsymInfo r;
  switch (b.kind) {
    case K::Nat:
      return r;
    case K::Omega:
      r.omega = true;
      return r;
    case K::Var:
      r.deg = 1;
      return r;
    case K::Sum:
      for (auto& k : b.kids) {
        AsymInfo i = asym_walk(k);
        r.omega |= i.omega;
        r.exp |= i.exp;
        r.deg = std::max(r.deg, i.deg);
      }
      return r;
    case K::Prod:
      for (auto& k : b.kids) {
        AsymInfo i = asym_walk(k);
        r.omega |= i.omega;
        r.exp |= i.exp;
        r.deg += i.deg;
      }
      return r;
    case K::Pow: {
      AsymInfo i = asym_walk(b.kids[0]);
      r.omega = i.omega;
      if (b.nat >= 2 && (i.exp || i.deg > 0)) r.exp = true;
      return r;
    }
  }
  return r;
}
}  // namespace detail

/// Growth class with every variable read as the common size parameter n.
inline AsymClass asymptotic_class(const BoundExpr& b) {
  detail::AsymInfo i = detail::asym_walk(b);
  if (i.omega) return AsymClass::Infinite;
  if (i.exp) return AsymClass::Exp;
  if (i.deg == 0) return AsymClass::Const;
  if (i.deg == 1) return AsymClass::Linear;
  if (i.deg == 2) return AsymClass::Quadratic;
  return AsymClass::PolyHigher;
}

/// Polynomial -> bound with each coefficient replaced by ceil(|c|).
inline BoundExpr to_bound_ceil_abs(const Polynomial& p) {
  std::vector<BoundExpr> terms;
  for (auto& [m, c] : p.terms) {
    std::vector<BoundExpr> fs;
    Int k = ceil_abs(c);
    if (k != 1 || m.exps.empty()) fs.push_back(b_nat(k));
    for (auto& [v, e] : m.exps)
      for (std::uint32_t i = 0; i < e; ++i) fs.push_back(b_var(v));
    terms.push_back(fs.size() == 1 ? fs[0] : b_prod(std::move(fs)));
  }
  if (terms.empty()) return b_nat(0);
  return bound_simplify(b_sum(std::move(terms)));
}

/// Poly-exponential with natural coefficients and bases -> bound expression,
/// with the counter n replaced by the bound r. Negative or fractional input
/// signals a missing ceil_abs_polyexp upstream.
inline BoundExpr polyexp_to_bound(const PolyExp& pe, const BoundExpr& r) {
  std::vector<BoundExpr> terms;
  for (auto& t : pe.terms) {
    if (t.b < 0 || !is_integer(t.b))
      throw std::invalid_argument("polyexp_to_bound: bases must be naturals");
    for (auto& [m, c] : t.alpha.terms) {
      if (c < 0 || !is_integer(c))
        throw std::invalid_argument("polyexp_to_bound: coefficients must be naturals");
      std::vector<BoundExpr> fs;
      if (c != 1 || (m.exps.empty() && t.a == 0 && t.b == 1)) fs.push_back(b_nat(num(c)));
      for (auto& [v, e] : m.exps)
        for (std::uint32_t i = 0; i < e; ++i) fs.push_back(b_var(v));
      for (std::uint32_t i = 0; i < t.a; ++i) fs.push_back(r);
      if (t.b != 1) fs.push_back(b_pow(num(t.b), r));
      terms.push_back(fs.size() == 1 ? fs[0] : b_prod(std::move(fs)));
    }
  }
  if (terms.empty()) return b_nat(0);
  return bound_simplify(b_sum(std::move(terms)));
}

inline std::string bound_str(const BoundExpr& b, const std::vector<std::string>& names) {
  using K = BoundExpr::Kind;
  auto name = [&](VarId v) {
    return v < names.size() ? names[v] : ("v" + std::to_string(v));
  };
  switch (b.kind) {
    case K::Nat:
      return b.nat.str();
    case K::Omega:
      return "omega";
    case K::Var:
      return name(b.var);
    case K::Pow: {
      std::string e = bound_str(b.kids[0], names);
      bool leaf = b.kids[0].kind == K::Var || b.kids[0].kind == K::Nat;
      return b.nat.str() + "^" + (leaf ? e : "(" + e + ")");
    }
    case K::Sum: {
      std::string out;
      for (auto& k : b.kids) {
        if (!out.empty()) out += "+";
        out += bound_str(k, names);
      }
      return out.empty() ? "0" : out;
    }
    case K::Prod: {
      std::string out;
      std::size_t i = 0;
      while (i < b.kids.size()) {
        std::size_t j = i;
        while (j < b.kids.size() && bound_cmp(b.kids[i], b.kids[j]) == 0) ++j;
        std::string f = bound_str(b.kids[i], names);
        if (b.kids[i].kind == K::Sum) f = "(" + f + ")";
        if (!out.empty()) out += "*";
        out += f;
        if (j - i > 1) out += "^" + std::to_string(j - i);
        i = j;
      }
      return out.empty() ? "1" : out;
    }
  }
  return "?";
}

}  // namespace itsbound

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "itsbound/bound.hpp"
#include "itsbound/polynomial.hpp"
#include "itsbound/program.hpp"
#include "itsbound/simplex.hpp"

namespace itsbound {

/// Ranking synthesis works in the linear fragment.  Nonlinear guard atoms
/// are dropped from the premises and nonlinearly updated variables are
/// pinned out of f's support (both strengthen the obligations, so any
/// certificate found is still sound); synthesis declines only when the
/// linear residue cannot certify.
struct NonLinear : std::runtime_error {
  NonLinear() : std::runtime_error("ranking works on the linear fragment") {}
};

/// f(x) = sum coeffs[v]*v + constant.
struct LinearRankingFunction {
  std::map<VarId, Rational> coeffs;
  Rational constant = 0;
};

inline Polynomial lrf_poly(const LinearRankingFunction& f) {
  Polynomial p = Polynomial::constant(f.constant);
  for (auto& [v, c] : f.coeffs) p = p + c * Polynomial::var(v);
  return p;
}

namespace detail {

struct FarkasImplication {
  std::vector<Polynomial> atoms;  // conjunct polyhedron, each atom p meaning p >= 1
  std::vector<RatVec> coef;       // per program variable: linear form over (a_0..a_{d-1}, a0)
  RatVec cst;                     // constant part of psi as a linear form over the unknowns
  Rational beta;                  // required lower bound for psi on the polyhedron
};

/// Variables updated nonlinearly anywhere in the obligation set; f's
/// coefficients there get pinned to zero so the composition f(update(x))
/// never reads a nonlinear polynomial.
inline std::vector<bool> nonlinear_update_vars(const std::vector<Loop>& decreasing,
                                               const std::vector<Loop>& scope, std::size_t dim) {
  std::vector<bool> bad(dim, false);
  for (auto* grp : {&decreasing, &scope})
    for (auto& l : *grp) {
      if (l.update.size() != dim) throw NonLinear();
      for (std::size_t v = 0; v < dim; ++v)
        if (!l.update[v].is_linear()) bad[v] = true;
    }
  return bad;
}

/// DNF with nonlinear atoms removed from each conjunct.  Dropping premises
/// widens the set of states the implication must cover, so certificates
/// found against the filtered guard still hold on the real one.
inline std::vector<std::vector<Polynomial>> linear_dnf(const Guard& g) {
  std::vector<std::vector<Polynomial>> dnf;
  try {
    dnf = guard_dnf(g);
  } catch (const std::runtime_error&) {
    throw NonLinear();  // oversized disjunction declines the same way
  }
  for (auto& conj : dnf)
    std::erase_if(conj, [](const Polynomial& atom) { return !atom.is_linear(); });
  return dnf;
}

/// psi(x) = f(x) - f(update(x)); the f-constant cancels.  Pinned variables
/// contribute nothing to the composed side.
inline void fill_decrease(FarkasImplication& im, const std::vector<Polynomial>& update,
                          const std::vector<bool>& bad, std::size_t dim) {
  im.coef.assign(dim, RatVec(dim + 1, Rational(0)));
  im.cst.assign(dim + 1, Rational(0));
  for (std::size_t u = 0; u < dim; ++u) im.coef[u][u] += 1;
  for (std::size_t v = 0; v < dim; ++v) {
    if (bad[v]) continue;
    for (std::size_t u = 0; u < dim; ++u) im.coef[u][v] -= update[v].linear_coeff(u);
    im.cst[v] -= update[v].constant_term();
  }
}

/// psi(x) = f(x).
inline void fill_value(FarkasImplication& im, std::size_t dim) {
  im.coef.assign(dim, RatVec(dim + 1, Rational(0)));
  im.cst.assign(dim + 1, Rational(0));
  for (std::size_t u = 0; u < dim; ++u) im.coef[u][u] = 1;
  im.cst[dim] = 1;
}

}  // namespace detail

/// Farkas encoding of "f decreases by >= 1 and stays >= 0 on every
/// `decreasing` case, and never increases on any `scope` case".  Unknown
/// columns: f's coefficients (one per variable), f's constant, then one
/// multiplier per polyhedron atom of each implication.  Guards with
/// disjunctions contribute one implication per disjunct; the single f must
/// satisfy them all.
inline LinearSystem farkas_encode(const std::vector<Loop>& decreasing,
                                  const std::vector<Loop>& scope) {
  if (decreasing.empty() && scope.empty()) throw NonLinear();
  std::size_t dim = (decreasing.empty() ? scope : decreasing).front().dim();
  std::vector<bool> bad = detail::nonlinear_update_vars(decreasing, scope, dim);

  std::vector<detail::FarkasImplication> imps;
  for (auto& l : decreasing) {
    for (auto& conj : detail::linear_dnf(l.guard)) {
      detail::FarkasImplication dec;
      dec.atoms = conj;
      dec.beta = 1;
      detail::fill_decrease(dec, l.update, bad, dim);
      imps.push_back(std::move(dec));
      detail::FarkasImplication low;
      low.atoms = conj;
      low.beta = 0;
      detail::fill_value(low, dim);
      imps.push_back(std::move(low));
    }
  }
  for (auto& l : scope) {
    for (auto& conj : detail::linear_dnf(l.guard)) {
      detail::FarkasImplication ni;
      ni.atoms = conj;
      ni.beta = 0;
      detail::fill_decrease(ni, l.update, bad, dim);
      imps.push_back(std::move(ni));
    }
  }

  std::size_t lam = 0;
  for (auto& im : imps) lam += im.atoms.size();
  std::size_t nbad = 0;
  for (std::size_t v = 0; v < dim; ++v)
    if (bad[v]) ++nbad;
  std::size_t cols = dim + 1 + lam;
  std::size_t rows = 2 * nbad;
  for (auto& im : imps) rows += 2 * dim + 1 + im.atoms.size();

  LinearSystem sys;
  sys.a = RatMatrix(rows, cols);
  sys.b.assign(rows, Rational(0));
  std::size_t r = 0, lbase = dim + 1;
  for (auto& im : imps) {
    std::size_t k = im.atoms.size();
    // lambda^T * G = -psi_lin, written as sum G[k][u]*lambda_k + psi_u = 0
    for (std::size_t u = 0; u < dim; ++u) {
      for (std::size_t q = 0; q < dim + 1; ++q) sys.a.at(r, q) = im.coef[u][q];
      for (std::size_t j = 0; j < k; ++j) sys.a.at(r, lbase + j) = -im.atoms[j].linear_coeff(u);
      for (std::size_t q = 0; q < cols; ++q) sys.a.at(r + 1, q) = -sys.a.at(r, q);
      r += 2;
    }
    // lambda^T * h <= psi_const - beta, with h_k = const(p_k) - 1
    for (std::size_t q = 0; q < dim + 1; ++q) sys.a.at(r, q) = -im.cst[q];
    for (std::size_t j = 0; j < k; ++j)
      sys.a.at(r, lbase + j) = Rational(im.atoms[j].constant_term() - 1);
    sys.b[r] = -im.beta;
    ++r;
    for (std::size_t j = 0; j < k; ++j) {
      sys.a.at(r, lbase + j) = -1;
      ++r;
    }
    lbase += k;
  }
  for (std::size_t v = 0; v < dim; ++v) {
    if (!bad[v]) continue;
    sys.a.at(r, v) = 1;
    sys.a.at(r + 1, v) = -1;
    r += 2;
  }
  return sys;
}

namespace detail {

/// Checks conj => psi >= beta over the rational relaxation by minimizing psi
/// on the atom polyhedron (each atom p read as p >= 1).
inline bool implies_at_least(const std::vector<Polynomial>& atoms, const Polynomial& psi,
                             const Rational& beta, std::size_t dim) {
  if (!psi.is_linear()) throw NonLinear();
  LinearSystem sys;
  sys.a = RatMatrix(atoms.size(), dim);
  sys.b.assign(atoms.size(), Rational(0));
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!atoms[i].is_linear()) throw NonLinear();
    for (std::size_t u = 0; u < dim; ++u) sys.a.at(i, u) = -atoms[i].linear_coeff(u);
    sys.b[i] = Rational(atoms[i].constant_term() - 1);
  }
  RatVec c(dim, Rational(0));
  for (std::size_t u = 0; u < dim; ++u) c[u] = psi.linear_coeff(u);
  sys.objective = std::move(c);
  LpResult res = lp_solve(sys);
  if (res.kind == LpResult::Kind::Infeasible) return true;  // vacuous case
  if (res.kind == LpResult::Kind::Unbounded) return false;
  return poly_eval(psi, res.point) >= beta;
}

}  // namespace detail

/// Replays the certificate directly: on every decreasing case the guard
/// forces f - f(update) >= 1 and f >= 0, on every scope case it forces
/// f - f(update) >= 0.
inline bool lrf_certifies(const LinearRankingFunction& f, const std::vector<Loop>& decreasing,
                          const std::vector<Loop>& scope) {
  std::size_t dim = (decreasing.empty() ? scope : decreasing).front().dim();
  std::vector<bool> bad = detail::nonlinear_update_vars(decreasing, scope, dim);
  for (auto& [v, c] : f.coeffs)
    if (v < dim && bad[v] && c != 0) return false;
  Polynomial fp = lrf_poly(f);
  for (auto& l : decreasing) {
    Polynomial drop = fp - poly_compose(fp, l.update);
    for (auto& conj : detail::linear_dnf(l.guard)) {
      if (!detail::implies_at_least(conj, drop, 1, dim)) return false;
      if (!detail::implies_at_least(conj, fp, 0, dim)) return false;
    }
  }
  for (auto& l : scope) {
    Polynomial drop = fp - poly_compose(fp, l.update);
    for (auto& conj : detail::linear_dnf(l.guard))
      if (!detail::implies_at_least(conj, drop, 0, dim)) return false;
  }
  return true;
}

/// Smallest (by coefficient magnitude sum) linear ranking function for the
/// decreasing cases within the scope, certified before returning.
inline std::optional<LinearRankingFunction> find_lrf(const std::vector<Loop>& decreasing,
                                                     const std::vector<Loop>& scope) {
  if (decreasing.empty()) return std::nullopt;
  try {
    LinearSystem sys = farkas_encode(decreasing, scope);
    std::size_t dim = decreasing.front().dim();
    LpResult res = lp_solve(detail::with_l1_objective(sys, dim + 1));
    if (!res.feasible()) return std::nullopt;
    LinearRankingFunction f;
    for (VarId v = 0; v < dim; ++v)
      if (res.point[v] != 0) f.coeffs[v] = res.point[v];
    f.constant = res.point[dim];
    if (!lrf_certifies(f, decreasing, scope)) return std::nullopt;
    return f;
  } catch (const NonLinear&) {
    return std::nullopt;
  }
}

/// ceil|linear part| + ceil|constant| + 1; the slack step covers the final
/// firing from fractional or negative boundary values.
inline BoundExpr local_runtime_from_lrf(const LinearRankingFunction& f) {
  Polynomial lin;
  for (auto& [v, c] : f.coeffs) lin = lin + c * Polynomial::var(v);
  std::vector<BoundExpr> parts;
  parts.push_back(to_bound_ceil_abs(lin));
  parts.push_back(b_nat(Int(ceil_abs(f.constant) + 1)));
  return bound_simplify(b_sum(std::move(parts)));
}

/// Fallback local runtime bound: how often the decreasing cases can fire
/// while only scope cases interleave.
inline std::optional<BoundExpr> ranking_runtime_bound(const std::vector<Loop>& decreasing,
                                                      const std::vector<Loop>& scope) {
  auto f = find_lrf(decreasing, scope);
  if (!f) return std::nullopt;
  return local_runtime_from_lrf(*f);
}

}  // namespace itsbound

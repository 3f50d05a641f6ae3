#pragma once

#include "itsbound/bound.hpp"
#include "itsbound/loop_transform.hpp"

namespace itsbound {

/// Size bound from a closed form: ceil(|cl_x|) with the counter replaced by
/// the runtime bound r, plus the unrolled values of the first n0 steps the
/// closed form does not cover.
inline std::vector<BoundExpr> size_bound_loop(const std::vector<Polynomial>& update,
                                              const ClosedForm& cf, const BoundExpr& r) {
  std::size_t d = update.size();
  std::vector<BoundExpr> sb(d);
  for (VarId v = 0; v < d; ++v) {
    std::vector<BoundExpr> parts;
    parts.push_back(polyexp_to_bound(ceil_abs_polyexp(cf.cl[v]), r));
    Polynomial cur = Polynomial::var(v);
    for (std::uint32_t i = 0; i < cf.cl[v].n0; ++i) {
      parts.push_back(to_bound_ceil_abs(cur));
      cur = poly_compose(cur, update);
    }
    sb[v] = bound_simplify(b_sum(std::move(parts)));
  }
  return sb;
}

namespace detail {

/// Bound on the first n from which a guard atom stays false, given the
/// atom's evolution c_k n^k + sum_{j<k} q_j(x) n^j with constant c_k < 0:
/// fails for all n >= D (1 + sum_j ceil|q_j|), D = ceil(1/|c_k|). Nothing if
/// the atom cannot witness an exit this way.
inline std::optional<BoundExpr> atom_exit_bound(const Polynomial& atom, const ClosedForm& cf,
                                                bool& saw_flip_base) {
  PolyExp pe = polyexp_compose_poly(atom, cf.cl);
  std::uint32_t start = pe.n0;
  std::vector<Polynomial> q;
  for (auto& t : pe.terms) {
    if (t.b == 1) {
      if (q.size() <= t.a) q.resize(t.a + 1);
      q[t.a] = q[t.a] + t.alpha;
    } else if (t.b == -1) {
      saw_flip_base = true;
      return std::nullopt;
    } else if (t.b == 0) {
      start = std::max(start, 1u);  // one-point correction, gone from n = 1 on
    } else {
      return std::nullopt;  // genuinely exponential evolution
    }
  }
  while (!q.empty() && q.back().is_zero()) q.pop_back();

  if (q.empty())  // atom value is identically 0, so p > 0 fails outright
    return b_nat(Int(start));
  std::uint32_t k = static_cast<std::uint32_t>(q.size()) - 1;
  if (!q[k].is_constant()) return std::nullopt;
  Rational ck = q[k].constant_term();
  if (k == 0) {
    if (ck > 0) return std::nullopt;  // constant, satisfied forever
    return b_nat(Int(start));
  }
  if (ck >= 0) return std::nullopt;  // grows without bound: no exit witness
  Int D = ceil_rat(Rational(1) / -ck);

  BoundExpr core;
  if (k == 1) {
    core = bound_simplify(b_prod({to_bound_ceil_abs(q[0]), b_nat(D)}));
  } else {
    std::vector<BoundExpr> s;
    s.push_back(b_nat(1));
    for (std::uint32_t j = 0; j < k; ++j) s.push_back(to_bound_ceil_abs(q[j]));
    core = bound_simplify(b_prod({b_nat(D), b_sum(std::move(s))}));
  }
  if (start > 0) core = bound_simplify(b_sum({core, b_nat(Int(start))}));
  return core;
}

/// Deterministic pick of the candidate that evaluates smallest on a spread
/// of uniform states; ties go to the earliest.
inline std::size_t pick_smallest_index(const std::vector<BoundExpr>& cands, std::size_t dim) {
  static const long samples[] = {0, 1, 2, 3, 7, 50};
  std::size_t best = 0;
  Int best_score = -1;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    Int score = 0;
    for (long s : samples) {
      NatOrOmega v = bound_eval(cands[i], std::vector<Int>(dim, Int(s)));
      score += v.is_omega() ? pow_int(10, 30) : *v.v;
    }
    if (best_score < 0 || score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

inline BoundExpr pick_smallest(const std::vector<BoundExpr>& cands, std::size_t dim) {
  return cands[pick_smallest_index(cands, dim)];
}

}  // namespace detail

/// Runtime bound for a triangular loop whose guard atoms evolve polynomially
/// in n with constant leading coefficients. Each disjunct is bounded by its
/// cheapest exiting atom; disjunct bounds add up. Flip bases (-1)^n get one
/// chance as a period-2 chain before the fragment gives up.
inline std::optional<BoundExpr> runtime_bound_twn(const Loop& loop, std::uint32_t depth = 0) {
  if (!is_twn(loop.update)) return std::nullopt;
  ClosedForm cf;
  std::vector<std::vector<Polynomial>> dnf;
  try {
    cf = closed_form_twn(loop.update);
    dnf = guard_dnf(loop.guard);
  } catch (const DegreeBlowup&) {
    return std::nullopt;
  } catch (const std::runtime_error&) {
    return std::nullopt;  // dnf size cap
  }

  bool saw_flip_base = false;
  bool complete = true;
  std::vector<BoundExpr> per_disjunct;
  for (auto& conj : dnf) {
    std::vector<BoundExpr> cands;
    for (auto& atom : conj) {
      auto b = detail::atom_exit_bound(atom, cf, saw_flip_base);
      if (b) cands.push_back(std::move(*b));
    }
    if (cands.empty()) {
      complete = false;
      break;
    }
    per_disjunct.push_back(detail::pick_smallest(cands, loop.update.size()));
  }
  if (complete) return bound_simplify(b_sum(std::move(per_disjunct)));

  if (depth == 0 && saw_flip_base) {
    auto r2 = runtime_bound_twn(chain(loop, 2), 1);
    if (r2) return bound_simplify(b_sum({b_prod({b_nat(2), *r2}), b_nat(1)}));
  }
  return std::nullopt;
}

namespace detail {

/// Runtime bound of the p-chained loop, expressed over the original
/// variables: conjugate to triangular coordinates, bound there, and map the
/// result back by substituting ceil|theta(v)| for each variable.
inline std::optional<BoundExpr> chained_runtime(const Loop& chained) {
  auto part = partition_blocks(chained.update);
  if (!part) return std::nullopt;
  TwnTransform t;
  try {
    t = to_twn(chained.update, *part);
  } catch (const NonIntegerSpectrum&) {
    return std::nullopt;
  }
  Loop lt{guard_compose(chained.guard, t.theta.inverse), t.update};
  auto rt = runtime_bound_twn(lt);
  if (!rt) return std::nullopt;
  std::map<VarId, BoundExpr> sub;
  for (VarId v = 0; v < t.theta.forward.size(); ++v)
    sub[v] = to_bound_ceil_abs(t.theta.forward[v]);
  return bound_simplify(bound_subst(*rt, sub));
}

}  // namespace detail

/// Runtime bound for a solvable loop whose spectrum turns integer after
/// chaining to the period p: one chained pass covers p plain passes, so the
/// chained bound r lifts to p*r + (p-1).
inline std::optional<BoundExpr> runtime_bound_prs(const Loop& loop, std::uint32_t cap = 360) {
  auto p = detect_prs(loop, cap);
  if (!p) return std::nullopt;
  auto r = detail::chained_runtime(chain(loop, *p));
  if (!r) return std::nullopt;
  return bound_simplify(b_sum({b_prod({b_nat(Int(*p)), *r}), b_nat(Int(*p - 1))}));
}

/// Size bound for a solvable loop via its chained closed form: any reachable
/// state is eta^i (i < p) of a chained-loop state, so
/// SB(x) = sum_{i<p} ceil|eta^i(x)| with the chained size bounds substituted
/// for the variables.
inline std::optional<std::vector<BoundExpr>> size_bound_prs(const Loop& loop,
                                                            std::uint32_t cap = 360) {
  auto p = detect_prs(loop, cap);
  if (!p) return std::nullopt;
  Loop lp = chain(loop, *p);
  auto r = detail::chained_runtime(lp);
  if (!r) return std::nullopt;
  std::optional<ClosedForm> cf;
  try {
    cf = solvable_closed_form(lp.update);
  } catch (const DegreeBlowup&) {
    return std::nullopt;
  }
  if (!cf) return std::nullopt;
  std::vector<BoundExpr> sbp = size_bound_loop(lp.update, *cf, *r);

  std::size_t d = loop.update.size();
  std::map<VarId, BoundExpr> sub;
  for (VarId v = 0; v < d; ++v) sub[v] = sbp[v];
  std::vector<BoundExpr> sb(d);
  for (VarId v = 0; v < d; ++v) {
    std::vector<BoundExpr> parts;
    Polynomial cur = Polynomial::var(v);
    for (std::uint32_t i = 0; i < *p; ++i) {
      parts.push_back(bound_subst(to_bound_ceil_abs(cur), sub));
      cur = poly_compose(cur, loop.update);
    }
    sb[v] = bound_simplify(b_sum(std::move(parts)));
  }
  return sb;
}

struct LoopAnalysisResult {
  std::optional<BoundExpr> runtime;
  std::optional<std::vector<BoundExpr>> sizes;
  std::string path;  // which technique produced the verdict, or why none did

  bool bounded() const { return runtime.has_value() && sizes.has_value(); }
};

inline LoopAnalysisResult analyze_loop(const Loop& loop, std::uint32_t cap = 360) {
  LoopAnalysisResult res;
  auto p = detect_prs(loop, cap);
  if (!p) {
    res.path = "outside the solvable fragment";
    return res;
  }
  Loop lp = chain(loop, *p);
  auto r = detail::chained_runtime(lp);
  if (!r) {
    res.path = "no runtime witness in the guard";
    return res;
  }
  std::optional<ClosedForm> cf;
  try {
    cf = solvable_closed_form(lp.update);
  } catch (const DegreeBlowup&) {
  }
  if (!cf) {
    res.path = "closed form unavailable";
    return res;
  }
  res.runtime =
      bound_simplify(b_sum({b_prod({b_nat(Int(*p)), *r}), b_nat(Int(*p - 1))}));
  res.sizes = size_bound_prs(loop, cap);
  if (!res.sizes) {
    res.runtime.reset();
    res.path = "size bounds unavailable";
    return res;
  }
  res.path = *p == 1 ? "twn-direct" : "prs-chained";
  return res;
}

}  // namespace itsbound

#pragma once

#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "itsbound/matrix.hpp"
#include "itsbound/program.hpp"
#include "itsbound/summation.hpp"

namespace itsbound {

struct NonIntegerSpectrum : std::runtime_error {
  NonIntegerSpectrum() : std::runtime_error("update matrix has a non-integer eigenvalue") {}
};

struct NotTriangular : std::runtime_error {
  NotTriangular() : std::runtime_error("update admits no triangular variable order") {}
};

struct DegreeBlowup : std::runtime_error {
  explicit DegreeBlowup(std::uint32_t d)
      : std::runtime_error("closed form exceeds degree cap (reached " + std::to_string(d) + ")") {}
};

/// One strongly connected component of the variable dependency graph.
/// Within the block the update is linear: x_S' = A x_S + offset, where the
/// offsets only read variables of earlier blocks.
struct Block {
  std::vector<VarId> vars;
  RatMatrix A{0, 0};
  std::vector<Polynomial> offset;
};

struct SolvablePartition {
  std::vector<Block> blocks;
};

namespace detail {

/// Tarjan over v -> w iff the update of v reads w. Components come out with
/// dependencies first, which is exactly the block order we need.
inline std::vector<std::vector<VarId>> dependency_sccs(const std::vector<Polynomial>& update) {
  std::size_t d = update.size();
  std::vector<std::vector<VarId>> adj(d), sccs;
  for (VarId v = 0; v < d; ++v)
    for (VarId w : update[v].vars()) adj[v].push_back(w);

  std::vector<std::uint32_t> index(d, 0), low(d, 0);
  std::vector<bool> on_stack(d, false), visited(d, false);
  std::vector<VarId> stack;
  std::uint32_t counter = 1;

  auto strongconnect = [&](auto&& self, VarId v) -> void {
    index[v] = low[v] = counter++;
    visited[v] = true;
    stack.push_back(v);
    on_stack[v] = true;
    for (VarId w : adj[v]) {
      if (!visited[w]) {
        self(self, w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<VarId> scc;
      VarId w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        scc.push_back(w);
      } while (w != v);
      std::sort(scc.begin(), scc.end());
      sccs.push_back(std::move(scc));
    }
  };
  for (VarId v = 0; v < d; ++v)
    if (!visited[v]) strongconnect(strongconnect, v);
  return sccs;
}

}  // namespace detail

/// Split the update into dependency blocks and check each block is linear
/// with an integer matrix over its own variables; all other monomials go to
/// the offset. Returns nothing if some block violates that shape.
inline std::optional<SolvablePartition> partition_blocks(const std::vector<Polynomial>& update) {
  SolvablePartition part;
  for (auto& scc : detail::dependency_sccs(update)) {
    Block blk;
    blk.vars = scc;
    std::size_t k = scc.size();
    blk.A = RatMatrix(k, k);
    blk.offset.resize(k);
    std::set<VarId> inside(scc.begin(), scc.end());
    for (std::size_t i = 0; i < k; ++i) {
      for (auto& [mono, coef] : update[scc[i]].terms) {
        bool in_block = mono.exps.size() == 1 && mono.exps[0].second == 1 &&
                        inside.count(mono.exps[0].first);
        if (in_block) {
          if (denominator(coef) != 1) return std::nullopt;
          std::size_t j = std::lower_bound(scc.begin(), scc.end(), mono.exps[0].first) -
                          scc.begin();
          blk.A.at(i, j) = coef;
        } else {
          for (auto& [v, e] : mono.exps)
            if (inside.count(v)) return std::nullopt;
          blk.offset[i].add_term(mono, coef);
        }
      }
    }
    part.blocks.push_back(std::move(blk));
  }
  return part;
}

/// A variable order in which every update is c*x + p with p over strictly
/// earlier variables. Ties go to the smaller variable id.
inline std::optional<std::vector<VarId>> twn_order(const std::vector<Polynomial>& update) {
  std::size_t d = update.size();
  std::vector<std::set<VarId>> deps(d);
  for (VarId v = 0; v < d; ++v) {
    Polynomial rest = update[v] - Polynomial::var(v) * update[v].linear_coeff(v);
    if (rest.mentions(v)) return std::nullopt;
    deps[v] = rest.vars();
  }
  std::vector<VarId> order;
  std::vector<bool> placed(d, false);
  for (std::size_t step = 0; step < d; ++step) {
    VarId pick = static_cast<VarId>(d);
    for (VarId v = 0; v < d && pick == d; ++v) {
      if (placed[v]) continue;
      bool ready = true;
      for (VarId w : deps[v])
        if (!placed[w]) ready = false;
      if (ready) pick = v;
    }
    if (pick == d) return std::nullopt;
    placed[pick] = true;
    order.push_back(pick);
  }
  return order;
}

inline bool is_twn(const std::vector<Polynomial>& update) {
  return twn_order(update).has_value();
}

/// p-fold composition: guard phi && eta(phi) && ... && eta^(p-1)(phi),
/// update eta^p. One pass of the chained loop simulates p original passes.
inline Loop chain(const Loop& loop, std::uint32_t p) {
  std::size_t d = loop.update.size();
  std::vector<Polynomial> cur(d);
  for (VarId v = 0; v < d; ++v) cur[v] = Polynomial::var(v);
  std::vector<Guard> gs;
  for (std::uint32_t i = 0; i < p; ++i) {
    gs.push_back(guard_compose(loop.guard, cur));
    for (VarId v = 0; v < d; ++v) cur[v] = poly_compose(cur[v], loop.update);
  }
  return Loop{g_and(std::move(gs)), std::move(cur)};
}

/// Least p such that every block matrix of eta^p has fully integer spectrum,
/// i.e. lcm of the block periods. Nothing if the update is not solvable or
/// some block period exceeds the cap.
inline std::optional<std::uint32_t> detect_prs(const Loop& loop, std::uint32_t cap = 360) {
  auto part = partition_blocks(loop.update);
  if (!part) return std::nullopt;
  std::uint32_t l = 1;
  for (auto& blk : part->blocks) {
    auto p = period_of(blk.A, cap);
    if (!p) return std::nullopt;
    l = std::lcm(l, *p);
    if (l > cap) return std::nullopt;
  }
  return l;
}

/// Linear change of variables and its inverse, as substitution maps.
struct Automorphism {
  std::vector<Polynomial> forward;
  std::vector<Polynomial> inverse;
};

struct TwnTransform {
  Automorphism theta;
  std::vector<Polynomial> update;
};

/// Conjugate each block by its Jordan basis: in the new coordinates the block
/// matrix is upper triangular with the (integer) eigenvalues on the diagonal,
/// so the whole update becomes triangular. The transformed update is
/// theta(v) with the original update substituted in, then mapped back
/// through theta^(-1).
inline TwnTransform to_twn(const std::vector<Polynomial>& update,
                           const SolvablePartition& part) {
  std::size_t d = update.size();
  TwnTransform t;
  t.theta.forward.resize(d);
  t.theta.inverse.resize(d);
  for (VarId v = 0; v < d; ++v) t.theta.forward[v] = t.theta.inverse[v] = Polynomial::var(v);

  for (auto& blk : part.blocks) {
    auto jf = jordan_form(blk.A);
    if (!jf) throw NonIntegerSpectrum();
    std::size_t k = blk.vars.size();
    for (std::size_t i = 0; i < k; ++i) {
      Polynomial f, g;
      for (std::size_t j = 0; j < k; ++j) {
        f = f + Polynomial::var(blk.vars[j]) * jf->Qinv.at(i, j);
        g = g + Polynomial::var(blk.vars[j]) * jf->Q.at(i, j);
      }
      t.theta.forward[blk.vars[i]] = f;
      t.theta.inverse[blk.vars[i]] = g;
    }
  }

  t.update.resize(d);
  for (VarId v = 0; v < d; ++v)
    t.update[v] = poly_compose(poly_compose(t.theta.forward[v], update), t.theta.inverse);
  return t;
}

/// Per-variable value after n steps as a poly-exponential expression in the
/// initial state, exact for all n >= n0.
struct ClosedForm {
  std::vector<PolyExp> cl;
  std::uint32_t n0 = 0;
};

namespace detail {

/// Substitute a closed form into a polynomial: p[v -> cls[v]].
inline PolyExp polyexp_compose_poly(const Polynomial& p, const std::vector<PolyExp>& cls) {
  PolyExp out;
  for (auto& [mono, coef] : p.terms) {
    PolyExp prod = PolyExp::from_poly(Polynomial::constant(coef));
    for (auto& [v, e] : mono.exps)
      for (std::uint32_t i = 0; i < e; ++i) prod = prod * cls[v];
    out = out + prod;
  }
  return out;
}

/// sum_{i=0}^{n-1} i^a b^i c^(n-1-i), c != 0. Exact for n >= 1; the b = c
/// case is exact at n = 0 as well.
inline PolyExp geom_conv_term(const Polynomial& alpha, std::uint32_t a, const Rational& b,
                              const Rational& c) {
  PolyExp out;
  if (b == c) {
    // resonance: c^(n-1) * ([a=0] + F_a(n-1)) with F_a the power-sum
    // polynomial; the bracket has root -1, so n = 0 comes out exact.
    UniPoly q = faulhaber(a);
    if (a == 0) q = q + UniPoly::constant(1);
    std::size_t deg = q.c.size();
    std::vector<Rational> shifted(deg, 0);  // q(n-1)
    for (std::size_t j = 0; j < deg; ++j) {
      if (q.c[j] == 0) continue;
      for (std::size_t s = 0; s <= j; ++s) {
        Rational sgn = ((j - s) % 2 == 0) ? 1 : -1;
        shifted[s] += q.c[j] * Rational(binomial(static_cast<std::uint32_t>(j),
                                                 static_cast<std::uint32_t>(s))) *
                      sgn;
      }
    }
    for (std::size_t s = 0; s < deg; ++s)
      if (shifted[s] != 0)
        out.terms.push_back({alpha * (shifted[s] / c), static_cast<std::uint32_t>(s), c});
  } else if (b == 0) {
    // only i = 0 survives, worth [a=0] * c^(n-1)
    if (a == 0) out.terms.push_back({alpha * (1 / c), 0, c});
  } else {
    PolyExp g = sum_power_geom(a, b / c);  // terms (q_i, i, b/c) and (-q_0, 0, 1)
    Rational kappa = (a == 0) ? 1 : 0;
    for (auto& t : g.terms)
      if (t.b == 1) kappa += t.alpha.constant_term();
    if (kappa != 0) out.terms.push_back({alpha * (kappa / c), 0, c});
    for (auto& t : g.terms) {
      if (t.b == 1) continue;
      // q_i (n-1)^i (b/c)^(n-1) c^(n-1) = q_i (n-1)^i b^(n-1)
      for (std::uint32_t s = 0; s <= t.a; ++s) {
        Rational sgn = ((t.a - s) % 2 == 0) ? 1 : -1;
        Rational coef = t.alpha.constant_term() * Rational(binomial(t.a, s)) * sgn / b;
        out.terms.push_back({alpha * coef, s, b});
      }
    }
  }
  out.normalize();
  return out;
}

}  // namespace detail

/// Closed form of a triangular update, variable by variable in a triangular
/// order. For x' = c*x + p the recurrence solution is
///   x^(n) = c^(n-m) x^(m) + sum_{k=m+1}^{n} c^(n-k) P(k-1)
/// where P is p with the earlier closed forms substituted in and m is the
/// start index P is valid from. Zero-base terms encode one-point corrections
/// at n = 0.
inline ClosedForm closed_form_twn(const std::vector<Polynomial>& update,
                                  std::uint32_t degree_cap = 12) {
  auto order = twn_order(update);
  if (!order) throw NotTriangular();
  std::size_t d = update.size();
  std::vector<PolyExp> cl(d);

  for (VarId x : *order) {
    Rational c = update[x].linear_coeff(x);
    Polynomial p = update[x] - Polynomial::var(x) * c;
    PolyExp P = detail::polyexp_compose_poly(p, cl);
    if (P.max_total_degree() > degree_cap) throw DegreeBlowup(P.max_total_degree());
    std::uint32_t m = P.n0;
    PolyExp acc;

    if (c == 0) {
      // x^(n) = P(n-1) for n >= m+1. Zero-base terms of P with a = 0 would
      // land on n = 1 only; dropping them costs one extra start index.
      PolyExp shifted;
      bool dropped = false;
      for (auto& t : P.terms) {
        if (t.b == 0) {
          if (t.a == 0) dropped = true;
          continue;
        }
        shifted.terms.push_back(t);
      }
      shifted.n0 = 0;
      shifted.normalize();
      acc = polyexp_shift_n(shifted, 1);
      acc.n0 = 0;
      PolyExp patch;
      patch.terms.push_back({Polynomial::var(x) - polyexp_at(acc, 0), 0, 0});
      acc = acc + patch;
      acc.n0 = m > 0 ? m + 1 : (dropped ? 2 : 0);
    } else {
      Polynomial etam = Polynomial::var(x);
      for (std::uint32_t i = 0; i < m; ++i) etam = poly_compose(etam, update);
      Polynomial gamma;  // formula values already counted below n = m
      for (std::uint32_t k = 1; k <= m; ++k)
        gamma = gamma + polyexp_at(P, k - 1) * pow_rat(1 / c, k);
      acc.terms.push_back({etam * pow_rat(1 / c, m) - gamma, 0, c});
      for (auto& t : P.terms) acc = acc + detail::geom_conv_term(t.alpha, t.a, t.b, c);
      if (m == 0) {
        PolyExp patch;
        patch.terms.push_back({Polynomial::var(x) - polyexp_at(acc, 0), 0, 0});
        acc = acc + patch;
      }
      acc.n0 = m;
    }

    acc.normalize();
    if (acc.max_total_degree() > degree_cap) throw DegreeBlowup(acc.max_total_degree());
    cl[x] = std::move(acc);
  }

  ClosedForm r;
  r.cl = std::move(cl);
  for (auto& e : r.cl) r.n0 = std::max(r.n0, e.n0);
  return r;
}

/// Pull a closed form of the conjugated update back to the original
/// variables: cl(v) = theta^(-1)(v) with the conjugated closed forms
/// substituted for the variables, then theta applied to the initial values
/// inside the coefficients.
inline ClosedForm closed_form_solvable(const Automorphism& theta, const ClosedForm& conj) {
  std::size_t d = conj.cl.size();
  ClosedForm r;
  r.cl.resize(d);
  for (VarId v = 0; v < d; ++v) {
    PolyExp e = detail::polyexp_compose_poly(theta.inverse[v], conj.cl);
    r.cl[v] = polyexp_subst_vars(e, theta.forward);
    r.n0 = std::max(r.n0, r.cl[v].n0);
  }
  return r;
}

/// One-call closed form for a solvable update with integer spectrum.
inline std::optional<ClosedForm> solvable_closed_form(const std::vector<Polynomial>& update,
                                                      std::uint32_t degree_cap = 12) {
  if (is_twn(update)) return closed_form_twn(update, degree_cap);
  auto part = partition_blocks(update);
  if (!part) return std::nullopt;
  try {
    TwnTransform t = to_twn(update, *part);
    return closed_form_solvable(t.theta, closed_form_twn(t.update, degree_cap));
  } catch (const NonIntegerSpectrum&) {
    return std::nullopt;
  }
}

/// Reference semantics: iterate the update n times on a concrete state.
inline std::vector<Rational> unroll_oracle(const std::vector<Polynomial>& update,
                                           std::vector<Rational> s, std::uint32_t n) {
  for (std::uint32_t i = 0; i < n; ++i) {
    std::vector<Rational> next(update.size());
    for (std::size_t v = 0; v < update.size(); ++v) next[v] = poly_eval(update[v], s);
    s = std::move(next);
  }
  return s;
}

inline std::vector<Rational> unroll_oracle(const std::vector<Polynomial>& update,
                                           const std::vector<Int>& s, std::uint32_t n) {
  return unroll_oracle(update, std::vector<Rational>(s.begin(), s.end()), n);
}

}  // namespace itsbound

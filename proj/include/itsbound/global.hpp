#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bound.hpp"
#include "loop_bounds.hpp"
#include "program.hpp"
#include "ranking.hpp"

namespace itsbound {

/// sb[t][x] bounds |x| after any firing of transition t, as an expression in
/// the absolute values of the initial state.  rb[t] bounds how often t fires.
using SizeBoundMap = std::vector<std::vector<BoundExpr>>;
using RuntimeBoundMap = std::vector<BoundExpr>;

/// Transitions outside the scope whose target is the source of a scope member.
inline std::vector<std::size_t> entry_transitions(const Program& p,
                                                  const std::vector<std::size_t>& scope) {
  std::set<std::size_t> in(scope.begin(), scope.end());
  std::set<std::uint32_t> srcs;
  for (std::size_t t : scope) srcs.insert(p.transitions[t].source);
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < p.transitions.size(); ++r)
    if (!in.count(r) && srcs.count(p.transitions[r].target)) out.push_back(r);
  return out;
}

/// Initial transitions fire once on the start state, so their update gives the
/// size bound directly.  Everything else starts unknown.
inline std::pair<SizeBoundMap, RuntimeBoundMap> initial_bounds(const Program& p) {
  const std::size_t V = p.vars.size();
  SizeBoundMap sb(p.transitions.size(), std::vector<BoundExpr>(V, b_omega()));
  RuntimeBoundMap rb(p.transitions.size(), b_omega());
  for (std::size_t i = 0; i < p.transitions.size(); ++i) {
    const Transition& t = p.transitions[i];
    if (t.source != p.initial) continue;
    rb[i] = b_nat(1);
    for (VarId x = 0; x < V; ++x) sb[i][x] = bound_simplify(to_bound_ceil_abs(t.update[x]));
  }
  return {std::move(sb), std::move(rb)};
}

/// A cycle through pairwise distinct locations; transitions[k] goes from the
/// location of transitions[k] to the source of transitions[k+1], wrapping at
/// the end.  The first transition starts at the smallest location on the cycle.
struct SimpleCycle {
  std::vector<std::size_t> transitions;
};

struct CycleEnumeration {
  std::vector<SimpleCycle> cycles;
  bool truncated = false;
};

/// All simple cycles of the location graph, one rotation each.  If the count
/// exceeds the cap, falls back to self-loops only and flags the truncation.
inline CycleEnumeration find_simple_cycles(const Program& p, std::size_t cap = 10000) {
  CycleEnumeration out;
  const std::size_t L = p.locations.size();
  std::vector<std::vector<std::size_t>> adj(L);
  for (std::size_t i = 0; i < p.transitions.size(); ++i)
    adj[p.transitions[i].source].push_back(i);

  std::vector<std::size_t> path;
  std::vector<char> onpath(L, 0);
  std::function<bool(std::uint32_t, std::uint32_t)> dfs = [&](std::uint32_t start,
                                                              std::uint32_t loc) {
    for (std::size_t tid : adj[loc]) {
      std::uint32_t tgt = p.transitions[tid].target;
      if (tgt == start) {
        path.push_back(tid);
        out.cycles.push_back({path});
        path.pop_back();
        if (out.cycles.size() > cap) return false;
      } else if (tgt > start && !onpath[tgt]) {
        onpath[tgt] = 1;
        path.push_back(tid);
        bool ok = dfs(start, tgt);
        path.pop_back();
        onpath[tgt] = 0;
        if (!ok) return false;
      }
    }
    return true;
  };
  for (std::uint32_t s = 0; s < L; ++s) {
    path.clear();
    std::fill(onpath.begin(), onpath.end(), 0);
    if (!dfs(s, s)) {
      out.truncated = true;
      break;
    }
  }
  if (out.truncated) {
    std::vector<SimpleCycle> keep;
    for (std::size_t i = 0; i < p.transitions.size(); ++i)
      if (p.transitions[i].source == p.transitions[i].target) keep.push_back({{i}});
    out.cycles = std::move(keep);
  }
  return out;
}

namespace detail {

constexpr int kChainDegreeCap = 16;

inline void bound_vars_into(const BoundExpr& b, std::set<VarId>& out) {
  if (b.kind == BoundExpr::Kind::Var) out.insert(b.var);
  for (const BoundExpr& k : b.kids) bound_vars_into(k, out);
}

/// Substitute entry r's size bounds into a local bound.  Fails when a needed
/// entry bound is still unknown.
inline std::optional<BoundExpr> instantiate(const BoundExpr& local, const SizeBoundMap& sb,
                                            std::size_t r) {
  std::set<VarId> vs;
  bound_vars_into(local, vs);
  std::map<VarId, BoundExpr> m;
  for (VarId v : vs) {
    if (!bound_is_finite(sb[r][v])) return std::nullopt;
    m[v] = sb[r][v];
  }
  return bound_simplify(bound_subst(local, m));
}

inline std::optional<BoundExpr> lift_size_one(const BoundExpr& local,
                                              const std::vector<std::size_t>& entries,
                                              const SizeBoundMap& sb) {
  if (!bound_is_finite(local)) return std::nullopt;
  std::vector<BoundExpr> parts;
  for (std::size_t r : entries) {
    auto s = instantiate(local, sb, r);
    if (!s) return std::nullopt;
    parts.push_back(std::move(*s));
  }
  if (parts.empty()) return b_nat(Int(0));
  return bound_simplify(b_sum(std::move(parts)));
}

inline std::optional<BoundExpr> lift_runtime_one(const BoundExpr& local,
                                                 const std::vector<std::size_t>& entries,
                                                 const SizeBoundMap& sb,
                                                 const RuntimeBoundMap& rb) {
  if (!bound_is_finite(local)) return std::nullopt;
  std::vector<BoundExpr> parts;
  for (std::size_t r : entries) {
    if (!bound_is_finite(rb[r])) return std::nullopt;
    auto s = instantiate(local, sb, r);
    if (!s) return std::nullopt;
    parts.push_back(bound_simplify(b_prod({rb[r], std::move(*s)})));
  }
  if (parts.empty()) return b_nat(Int(0));
  return bound_simplify(b_sum(std::move(parts)));
}

}  // namespace detail

/// Lift a local size bound for t' across all entries of the scope:
/// the new bound is the sum over entries r of local[v / sb[r][v]].
/// Entries of the map other than t' are returned unchanged; a variable whose
/// lift needs an unknown entry bound stays as it was.
inline SizeBoundMap lift_size_bound(const Program& p, std::size_t tprime,
                                    const std::vector<std::size_t>& scope,
                                    const std::vector<BoundExpr>& local, SizeBoundMap sb) {
  auto entries = entry_transitions(p, scope);
  for (VarId x = 0; x < local.size(); ++x) {
    auto lifted = detail::lift_size_one(local[x], entries, sb);
    if (lifted) sb[tprime][x] = std::move(*lifted);
  }
  return sb;
}

/// Lift a local runtime bound for the targets across all entries of the scope:
/// sum over entries r of rb[r] * local[v / sb[r][v]].
inline RuntimeBoundMap lift_runtime_bound(const Program& p,
                                          const std::vector<std::size_t>& targets,
                                          const std::vector<std::size_t>& scope,
                                          const BoundExpr& local, const SizeBoundMap& sb,
                                          RuntimeBoundMap rb) {
  auto entries = entry_transitions(p, scope);
  auto lifted = detail::lift_runtime_one(local, entries, sb, rb);
  if (lifted)
    for (std::size_t t : targets) rb[t] = *lifted;
  return rb;
}

/// Chain the cycle into one loop over the full variable space, starting at the
/// given position: guard collects each member guard pre-composed with the
/// updates before it, the update is the full composition.
inline std::optional<Loop> chain_cycle(const Program& p, const SimpleCycle& c,
                                       std::size_t startPos) {
  const std::size_t V = p.vars.size();
  const std::size_t n = c.transitions.size();
  std::vector<Polynomial> u(V);
  for (VarId v = 0; v < V; ++v) u[v] = Polynomial::var(v);
  std::vector<Guard> parts;
  for (std::size_t k = 0; k < n; ++k) {
    const Transition& t = p.transitions[c.transitions[(startPos + k) % n]];
    parts.push_back(guard_compose(t.guard, u));
    std::vector<Polynomial> next(V);
    for (VarId v = 0; v < V; ++v) {
      next[v] = poly_compose(t.update[v], u);
      if (next[v].degree() > detail::kChainDegreeCap) return std::nullopt;
    }
    u = std::move(next);
  }
  return Loop{g_and(std::move(parts)), std::move(u)};
}

namespace detail {

struct LocalBounds {
  std::optional<BoundExpr> runtime;
  std::optional<std::vector<BoundExpr>> sizes;
};

/// Local bounds of a self-loop, over the full program variable space.  Tries
/// the reduced view of the transition first, else analyzes the full space.
inline LocalBounds self_loop_local(const Program& p, const Transition& t, std::uint32_t cap) {
  const std::size_t V = p.vars.size();
  LocalBounds out;
  if (auto lt = loop_of_transition(p, t)) {
    LoopAnalysisResult res = analyze_loop(lt->loop, cap);
    if (!res.bounded()) return out;
    std::map<VarId, BoundExpr> ren;
    for (std::size_t i = 0; i < lt->varmap.size(); ++i)
      ren[static_cast<VarId>(i)] = b_var(lt->varmap[i]);
    out.runtime = bound_simplify(bound_subst(*res.runtime, ren));
    std::vector<BoundExpr> sizes(V);
    for (VarId v = 0; v < V; ++v) sizes[v] = b_var(v);
    for (std::size_t i = 0; i < lt->varmap.size(); ++i)
      sizes[lt->varmap[i]] = bound_simplify(bound_subst((*res.sizes)[i], ren));
    out.sizes = std::move(sizes);
    return out;
  }
  LoopAnalysisResult res = analyze_loop(Loop{t.guard, t.update}, cap);
  if (!res.bounded()) return out;
  out.runtime = res.runtime;
  out.sizes = res.sizes;
  return out;
}

/// Updates composed from rotated position j through the end of the cycle.
inline std::optional<std::vector<Polynomial>> cycle_suffix(const Program& p,
                                                           const SimpleCycle& c,
                                                           std::size_t startPos,
                                                           std::size_t j) {
  const std::size_t V = p.vars.size();
  const std::size_t n = c.transitions.size();
  std::vector<Polynomial> q(V);
  for (VarId v = 0; v < V; ++v) q[v] = Polynomial::var(v);
  for (std::size_t k = j; k < n; ++k) {
    const Transition& t = p.transitions[c.transitions[(startPos + k) % n]];
    std::vector<Polynomial> next(V);
    for (VarId v = 0; v < V; ++v) {
      next[v] = poly_compose(t.update[v], q);
      if (next[v].degree() > kChainDegreeCap) return std::nullopt;
    }
    q = std::move(next);
  }
  return q;
}

/// Local bounds for one member of a cycle, relative to runs that stay inside
/// the cycle.  The chain starts right after the target, so the target is the
/// last step of the chained loop.  Size bounds sum the chained loop's bound
/// pushed through the partial pass from each entry position to the chain
/// start; the runtime adds one firing for that partial pass.
inline LocalBounds cycle_local(const Program& p, const SimpleCycle& c, std::size_t targetPos,
                               std::uint32_t cap) {
  const std::size_t V = p.vars.size();
  const std::size_t n = c.transitions.size();
  if (n == 1) return self_loop_local(p, p.transitions[c.transitions[0]], cap);

  LocalBounds out;
  std::size_t startPos = (targetPos + 1) % n;
  auto chained = chain_cycle(p, c, startPos);
  if (!chained) return out;
  LoopAnalysisResult res = analyze_loop(*chained, cap);
  if (!res.bounded()) return out;

  auto entries = entry_transitions(p, c.transitions);
  std::set<std::uint32_t> entryLocs;
  for (std::size_t r : entries) entryLocs.insert(p.transitions[r].target);
  std::vector<std::size_t> positions;
  for (std::size_t j = 0; j < n; ++j)
    if (entryLocs.count(p.transitions[c.transitions[(startPos + j) % n]].source))
      positions.push_back(j);

  std::vector<BoundExpr> rtParts{b_nat(Int(1))};
  std::vector<std::vector<BoundExpr>> szParts(V);
  for (std::size_t j : positions) {
    auto q = cycle_suffix(p, c, startPos, j);
    if (!q) return out;
    std::map<VarId, BoundExpr> sub;
    for (VarId v = 0; v < V; ++v) sub[v] = to_bound_ceil_abs((*q)[v]);
    rtParts.push_back(bound_subst(*res.runtime, sub));
    for (VarId v = 0; v < V; ++v) szParts[v].push_back(bound_subst((*res.sizes)[v], sub));
  }
  out.runtime = bound_simplify(b_sum(std::move(rtParts)));
  std::vector<BoundExpr> sizes(V);
  for (VarId v = 0; v < V; ++v)
    sizes[v] = szParts[v].empty() ? b_nat(Int(0)) : bound_simplify(b_sum(std::move(szParts[v])));
  out.sizes = std::move(sizes);
  return out;
}

struct LocationSccs {
  std::vector<std::size_t> comp;                 // location -> component id
  std::vector<std::vector<std::uint32_t>> topo;  // components, sources first
};

inline LocationSccs location_sccs(const Program& p) {
  const std::size_t L = p.locations.size();
  std::vector<std::vector<std::uint32_t>> adj(L);
  for (const Transition& t : p.transitions) adj[t.source].push_back(t.target);

  LocationSccs out;
  out.comp.assign(L, 0);
  std::vector<std::size_t> index(L, 0), low(L, 0);
  std::vector<char> instack(L, 0);
  std::vector<std::uint32_t> stack;
  std::size_t counter = 1;

  std::function<void(std::uint32_t)> strongconnect = [&](std::uint32_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    instack[v] = 1;
    for (std::uint32_t w : adj[v]) {
      if (index[w] == 0) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (instack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::uint32_t> comp;
      for (;;) {
        std::uint32_t w = stack.back();
        stack.pop_back();
        instack[w] = 0;
        comp.push_back(w);
        if (w == v) break;
      }
      out.topo.push_back(std::move(comp));
    }
  };
  for (std::uint32_t v = 0; v < L; ++v)
    if (index[v] == 0) strongconnect(v);

  // Tarjan emits sinks first; analysis wants sources first.
  std::reverse(out.topo.begin(), out.topo.end());
  for (std::size_t c = 0; c < out.topo.size(); ++c)
    for (std::uint32_t v : out.topo[c]) out.comp[v] = c;
  return out;
}

}  // namespace detail

/// Local size bounds of a self-loop transition over the program variables,
/// when its loop sits in the analyzable fragment.
inline std::optional<std::vector<BoundExpr>> local_size_bound_from_loop(const Program& p,
                                                                        const Transition& t,
                                                                        std::uint32_t cap = 360) {
  return detail::self_loop_local(p, t, cap).sizes;
}

/// Local size bounds for one member of a simple cycle (identified by its
/// position in the cycle), relative to runs inside the cycle.
inline std::optional<std::vector<BoundExpr>> local_size_bound_cycle(const Program& p,
                                                                    const SimpleCycle& c,
                                                                    std::size_t targetPos,
                                                                    std::uint32_t cap = 360) {
  return detail::cycle_local(p, c, targetPos, cap).sizes;
}

struct AnalyzeOptions {
  std::uint32_t period_cap = 360;
  std::size_t cycle_cap = 10000;
};

struct GlobalAnalysis {
  SizeBoundMap sb;
  RuntimeBoundMap rb;
  BoundExpr total;
  std::vector<std::string> rb_path;  // how each runtime bound was obtained
  bool cycles_truncated = false;

  bool all_finite() const { return bound_is_finite(total); }
};

/// Whole-program analysis: start from the initial bounds and move entries from
/// unknown to finite, walking the location components in topological order.
/// Inside a component the candidates per transition are the cycle bounds it
/// sits on, a ranking certificate over the whole component, an arrival count
/// through its source location, and for sizes also the non-increase rule and
/// the predecessor sum.  Every rule is sound for any sound inputs, so entries
/// are written once with the smallest available candidate.
inline GlobalAnalysis analyze_program(const Program& p, AnalyzeOptions opt = {}) {
  const std::size_t T = p.transitions.size();
  const std::size_t V = p.vars.size();

  GlobalAnalysis out;
  auto ib = initial_bounds(p);
  out.sb = std::move(ib.first);
  out.rb = std::move(ib.second);
  out.rb_path.assign(T, "unbounded");
  for (std::size_t i = 0; i < T; ++i)
    if (p.transitions[i].source == p.initial) out.rb_path[i] = "initial";

  auto cyc = find_simple_cycles(p, opt.cycle_cap);
  out.cycles_truncated = cyc.truncated;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> cyclesOf(T);
  for (std::size_t ci = 0; ci < cyc.cycles.size(); ++ci)
    for (std::size_t k = 0; k < cyc.cycles[ci].transitions.size(); ++k)
      cyclesOf[cyc.cycles[ci].transitions[k]].push_back({ci, k});

  auto sccs = detail::location_sccs(p);
  std::map<std::pair<std::size_t, std::size_t>, detail::LocalBounds> cycleMemo;
  auto cycle_local_of = [&](std::size_t ci, std::size_t pos) -> const detail::LocalBounds& {
    auto key = std::make_pair(ci, pos);
    auto it = cycleMemo.find(key);
    if (it == cycleMemo.end())
      it = cycleMemo.emplace(key, detail::cycle_local(p, cyc.cycles[ci], pos, opt.period_cap))
               .first;
    return it->second;
  };

  std::vector<std::vector<std::size_t>> preds(T);  // by source location
  {
    std::vector<std::vector<std::size_t>> into(p.locations.size());
    for (std::size_t r = 0; r < T; ++r) into[p.transitions[r].target].push_back(r);
    for (std::size_t t = 0; t < T; ++t) preds[t] = into[p.transitions[t].source];
  }

  for (std::size_t comp = 0; comp < sccs.topo.size(); ++comp) {
    std::set<std::uint32_t> locs(sccs.topo[comp].begin(), sccs.topo[comp].end());
    std::vector<std::size_t> members;
    for (std::size_t t = 0; t < T; ++t)
      if (locs.count(p.transitions[t].source) && locs.count(p.transitions[t].target))
        members.push_back(t);

    // Transitions leaving this component fire at most once: the component
    // graph is acyclic, so their source becomes unreachable afterwards.
    for (std::size_t tid = 0; tid < T; ++tid) {
      const Transition& t = p.transitions[tid];
      if (t.source == p.initial || !locs.count(t.source) || locs.count(t.target)) continue;
      out.rb[tid] = b_nat(Int(1));
      out.rb_path[tid] = "once across components";
    }

    if (!members.empty()) {
      auto compEntries = entry_transitions(p, members);
      std::vector<Loop> memberLoops;
      for (std::size_t t : members)
        memberLoops.push_back({p.transitions[t].guard, p.transitions[t].update});

      // Variables no member ever increases in absolute value: identity
      // updates, or guarded decrements that cannot cross zero.
      std::vector<char> noninc(V, 1);
      for (VarId x = 0; x < V && !members.empty(); ++x) {
        for (std::size_t t : members) {
          const Polynomial& ux = p.transitions[t].update[x];
          if (ux == Polynomial::var(x)) continue;
          Polynomial delta = ux - Polynomial::var(x);
          bool ok = delta.is_constant() && delta.constant_term() <= 0;
          if (ok) {
            try {
              for (const auto& conj : itsbound::detail::linear_dnf(p.transitions[t].guard))
                if (!detail::implies_at_least(conj, ux, 0, V)) {
                  ok = false;
                  break;
                }
            } catch (const std::exception&) {
              ok = false;
            }
          }
          if (!ok) {
            noninc[x] = 0;
            break;
          }
        }
      }

      std::map<std::size_t, std::optional<BoundExpr>> rankMemo;
      auto ranking_local = [&](std::size_t tid) -> const std::optional<BoundExpr>& {
        auto it = rankMemo.find(tid);
        if (it != rankMemo.end()) return it->second;
        std::vector<Loop> rest;
        for (std::size_t mi = 0; mi < members.size(); ++mi)
          if (members[mi] != tid) rest.push_back(memberLoops[mi]);
        auto rb = ranking_runtime_bound({Loop{p.transitions[tid].guard, p.transitions[tid].update}},
                                        rest);
        return rankMemo.emplace(tid, std::move(rb)).first->second;
      };

      // How often can a non-self-loop member fire: once per stay at its
      // source, and stays are opened by arrivals from other locations.
      std::function<std::optional<BoundExpr>(std::size_t, std::set<std::size_t>&)>
          arrival_local = [&](std::size_t tid,
                              std::set<std::size_t>& visiting) -> std::optional<BoundExpr> {
        const Transition& t = p.transitions[tid];
        if (t.source == t.target) return std::nullopt;
        std::vector<BoundExpr> parts{b_nat(Int(1))};
        for (std::size_t t2 : members) {
          const Transition& o = p.transitions[t2];
          if (o.target != t.source || o.source == t.source) continue;
          std::optional<BoundExpr> r2 = ranking_local(t2);
          if (!r2 && !visiting.count(t2)) {
            visiting.insert(t2);
            r2 = arrival_local(t2, visiting);
            visiting.erase(t2);
          }
          if (!r2) return std::nullopt;
          parts.push_back(*r2);
        }
        return bound_simplify(b_sum(std::move(parts)));
      };

      bool changed = true;
      while (changed) {
        changed = false;
        for (std::size_t tid : members) {
          if (!bound_is_finite(out.rb[tid])) {
            std::vector<BoundExpr> cands;
            std::vector<const char*> labels;
            auto add = [&](BoundExpr b, const char* lab) {
              cands.push_back(std::move(b));
              labels.push_back(lab);
            };
            for (auto [ci, pos] : cyclesOf[tid]) {
              const auto& cl = cycle_local_of(ci, pos);
              if (!cl.runtime) continue;
              auto entries = entry_transitions(p, cyc.cycles[ci].transitions);
              auto lifted = detail::lift_runtime_one(*cl.runtime, entries, out.sb, out.rb);
              if (lifted) add(std::move(*lifted), "cycle path");
            }
            if (const auto& rl = ranking_local(tid)) {
              auto lifted = detail::lift_runtime_one(*rl, compEntries, out.sb, out.rb);
              if (lifted) add(std::move(*lifted), "ranking certificate");
            }
            {
              std::set<std::size_t> visiting{tid};
              if (auto al = arrival_local(tid, visiting)) {
                auto lifted = detail::lift_runtime_one(*al, compEntries, out.sb, out.rb);
                if (lifted) add(std::move(*lifted), "arrival count");
              }
            }
            const Transition& tr = p.transitions[tid];
            if (tr.source != tr.target) {
              // Each firing ends one stay at the source; stays are opened
              // by arrivals from elsewhere or by starting the run there.
              std::vector<BoundExpr> parts;
              bool ok = true;
              for (std::size_t t2 = 0; t2 < T && ok; ++t2) {
                const Transition& o = p.transitions[t2];
                if (o.target != tr.source || o.source == tr.source) continue;
                if (!bound_is_finite(out.rb[t2]))
                  ok = false;
                else
                  parts.push_back(out.rb[t2]);
              }
              if (ok) {
                if (tr.source == p.initial) parts.push_back(b_nat(Int(1)));
                add(parts.empty() ? b_nat(Int(0)) : bound_simplify(b_sum(std::move(parts))),
                    "arrival count");
              }
            }
            if (tr.source != tr.target) {
              // Each firing opens one stay at the target; every stay but
              // the last is closed by some transition that leaves it.
              std::vector<BoundExpr> parts{b_nat(Int(1))};
              bool ok = true;
              for (std::size_t t2 = 0; t2 < T && ok; ++t2) {
                const Transition& o = p.transitions[t2];
                if (o.source != tr.target || o.target == tr.target) continue;
                if (!bound_is_finite(out.rb[t2]))
                  ok = false;
                else
                  parts.push_back(out.rb[t2]);
              }
              if (ok) add(bound_simplify(b_sum(std::move(parts))), "departure count");
            }
            if (!cands.empty()) {
              std::size_t bi = detail::pick_smallest_index(cands, V);
              out.rb[tid] = cands[bi];
              out.rb_path[tid] = labels[bi];
              changed = true;
            }
          }

          for (VarId x = 0; x < V; ++x) {
            if (bound_is_finite(out.sb[tid][x])) continue;
            std::vector<BoundExpr> cands;
            if (noninc[x]) {
              std::vector<BoundExpr> parts;
              bool ok = true;
              for (std::size_t r : compEntries) {
                if (!bound_is_finite(out.sb[r][x])) {
                  ok = false;
                  break;
                }
                parts.push_back(out.sb[r][x]);
              }
              if (ok)
                cands.push_back(parts.empty() ? b_nat(Int(0))
                                              : bound_simplify(b_sum(std::move(parts))));
            }
            for (auto [ci, pos] : cyclesOf[tid]) {
              const auto& cl = cycle_local_of(ci, pos);
              if (!cl.sizes) continue;
              auto entries = entry_transitions(p, cyc.cycles[ci].transitions);
              auto lifted = detail::lift_size_one((*cl.sizes)[x], entries, out.sb);
              if (lifted) cands.push_back(std::move(*lifted));
            }
            {
              BoundExpr step = to_bound_ceil_abs(p.transitions[tid].update[x]);
              std::vector<BoundExpr> parts;
              bool ok = true;
              for (std::size_t r : preds[tid]) {
                auto s = detail::instantiate(step, out.sb, r);
                if (!s) {
                  ok = false;
                  break;
                }
                parts.push_back(std::move(*s));
              }
              if (ok)
                cands.push_back(parts.empty() ? b_nat(Int(0))
                                              : bound_simplify(b_sum(std::move(parts))));
            }
            if (!cands.empty()) {
              out.sb[tid][x] = detail::pick_smallest(cands, V);
              changed = true;
            }
          }
        }
      }
    }

    // Size bounds for the departing transitions, once the component has
    // stabilized: one more step through their own update.
    for (std::size_t tid = 0; tid < T; ++tid) {
      const Transition& t = p.transitions[tid];
      if (t.source == p.initial || !locs.count(t.source) || locs.count(t.target)) continue;
      for (VarId x = 0; x < V; ++x) {
        if (bound_is_finite(out.sb[tid][x])) continue;
        BoundExpr step = to_bound_ceil_abs(t.update[x]);
        std::vector<BoundExpr> parts;
        bool ok = true;
        for (std::size_t r : preds[tid]) {
          auto s = detail::instantiate(step, out.sb, r);
          if (!s) {
            ok = false;
            break;
          }
          parts.push_back(std::move(*s));
        }
        if (ok)
          out.sb[tid][x] =
              parts.empty() ? b_nat(Int(0)) : bound_simplify(b_sum(std::move(parts)));
      }
    }
  }

  std::vector<BoundExpr> all(out.rb.begin(), out.rb.end());
  out.total = bound_simplify(b_sum(std::move(all)));
  return out;
}

}  // namespace itsbound

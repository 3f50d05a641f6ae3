#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "itsbound/polynomial.hpp"

namespace itsbound {

/// Guard: and/or tree over strict atoms p > 0. Other comparisons are
/// normalized away at construction time (integer semantics).
struct Guard {
  enum class Kind { True, Atom, And, Or };

  Kind kind = Kind::True;
  Polynomial atom;          // Kind::Atom, meaning atom > 0
  std::vector<Guard> kids;  // Kind::And / Kind::Or

  bool operator==(const Guard& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Atom) return atom == o.atom;
    return kids == o.kids;
  }
};

inline Guard g_true() { return {}; }

inline Guard g_atom(Polynomial p) {
  Guard g;
  g.kind = Guard::Kind::Atom;
  g.atom = std::move(p);
  return g;
}

inline Guard g_and(std::vector<Guard> kids) {
  std::vector<Guard> flat;
  for (auto& k : kids) {
    if (k.kind == Guard::Kind::True) continue;
    if (k.kind == Guard::Kind::And)
      flat.insert(flat.end(), k.kids.begin(), k.kids.end());
    else
      flat.push_back(std::move(k));
  }
  if (flat.empty()) return g_true();
  if (flat.size() == 1) return flat[0];
  Guard g;
  g.kind = Guard::Kind::And;
  g.kids = std::move(flat);
  return g;
}

inline Guard g_or(std::vector<Guard> kids) {
  std::vector<Guard> flat;
  for (auto& k : kids) {
    if (k.kind == Guard::Kind::Or)
      flat.insert(flat.end(), k.kids.begin(), k.kids.end());
    else
      flat.push_back(std::move(k));
  }
  if (flat.empty()) return g_true();
  if (flat.size() == 1) return flat[0];
  Guard g;
  g.kind = Guard::Kind::Or;
  g.kids = std::move(flat);
  return g;
}

inline bool guard_eval(const Guard& g, const std::vector<Rational>& state) {
  switch (g.kind) {
    case Guard::Kind::True:
      return true;
    case Guard::Kind::Atom:
      return poly_eval(g.atom, state) > 0;
    case Guard::Kind::And:
      for (auto& k : g.kids)
        if (!guard_eval(k, state)) return false;
      return true;
    case Guard::Kind::Or:
      for (auto& k : g.kids)
        if (guard_eval(k, state)) return true;
      return false;
  }
  return true;
}

inline bool guard_eval(const Guard& g, const std::vector<Int>& state) {
  std::vector<Rational> s(state.begin(), state.end());
  return guard_eval(g, s);
}

/// Guard after one update step: every atom composed with the update.
inline Guard guard_compose(const Guard& g, const std::vector<Polynomial>& update) {
  Guard r = g;
  if (r.kind == Guard::Kind::Atom) {
    r.atom = poly_compose(r.atom, update);
    return r;
  }
  for (auto& k : r.kids) k = guard_compose(k, update);
  return r;
}

inline void guard_vars(const Guard& g, std::set<VarId>& out) {
  if (g.kind == Guard::Kind::Atom) {
    for (VarId v : g.atom.vars()) out.insert(v);
    return;
  }
  for (auto& k : g.kids) guard_vars(k, out);
}

/// Atoms of a pure conjunction; none when any disjunction occurs.
inline std::optional<std::vector<Polynomial>> conj_atoms(const Guard& g) {
  std::vector<Polynomial> atoms;
  std::function<bool(const Guard&)> walk = [&](const Guard& q) {
    switch (q.kind) {
      case Guard::Kind::True:
        return true;
      case Guard::Kind::Atom:
        atoms.push_back(q.atom);
        return true;
      case Guard::Kind::And:
        for (auto& k : q.kids)
          if (!walk(k)) return false;
        return true;
      case Guard::Kind::Or:
        return false;
    }
    return false;
  };
  if (!walk(g)) return std::nullopt;
  return atoms;
}

/// Disjunctive normal form: list of conjunctions of atoms. Empty conjunction
/// means true. Size-capped to keep pathological guards from exploding.
inline std::vector<std::vector<Polynomial>> guard_dnf(const Guard& g, std::size_t cap = 64) {
  switch (g.kind) {
    case Guard::Kind::True:
      return {{}};
    case Guard::Kind::Atom:
      return {{g.atom}};
    case Guard::Kind::Or: {
      std::vector<std::vector<Polynomial>> out;
      for (auto& k : g.kids) {
        auto sub = guard_dnf(k, cap);
        out.insert(out.end(), sub.begin(), sub.end());
        if (out.size() > cap) throw std::runtime_error("guard_dnf: disjunct cap exceeded");
      }
      return out;
    }
    case Guard::Kind::And: {
      std::vector<std::vector<Polynomial>> out = {{}};
      for (auto& k : g.kids) {
        auto sub = guard_dnf(k, cap);
        std::vector<std::vector<Polynomial>> next;
        for (auto& a : out)
          for (auto& b : sub) {
            auto c = a;
            c.insert(c.end(), b.begin(), b.end());
            next.push_back(std::move(c));
          }
        if (next.size() > cap) throw std::runtime_error("guard_dnf: disjunct cap exceeded");
        out = std::move(next);
      }
      return out;
    }
  }
  return {{}};
}

inline std::string guard_str(const Guard& g, const std::vector<std::string>& names) {
  switch (g.kind) {
    case Guard::Kind::True:
      return "";
    case Guard::Kind::Atom:
      return poly_str(g.atom, names) + " > 0";
    case Guard::Kind::And: {
      std::string out;
      for (auto& k : g.kids) {
        if (!out.empty()) out += " && ";
        std::string s = guard_str(k, names);
        if (k.kind == Guard::Kind::Or) s = "(" + s + ")";
        out += s;
      }
      return out;
    }
    case Guard::Kind::Or: {
      std::string out;
      for (auto& k : g.kids) {
        if (!out.empty()) out += " || ";
        out += guard_str(k, names);
      }
      return out;
    }
  }
  return "";
}

/// A standalone loop while(guard) { x := update(x) } over variables 0..d-1.
struct Loop {
  Guard guard;
  std::vector<Polynomial> update;

  std::size_t dim() const { return update.size(); }
};

struct Transition {
  std::uint32_t id = 0;
  std::uint32_t source = 0, target = 0;  // indices into Program::locations
  Guard guard;
  std::vector<Polynomial> update;  // total: one polynomial per program variable

  bool operator==(const Transition& o) const {
    return id == o.id && source == o.source && target == o.target && guard == o.guard &&
           update == o.update;
  }
};

struct Program {
  std::vector<std::string> vars;
  std::vector<std::string> locations;
  std::uint32_t initial = 0;
  std::vector<Transition> transitions;

  bool operator==(const Program& o) const {
    return vars == o.vars && locations == o.locations && initial == o.initial &&
           transitions == o.transitions;
  }
};

struct Config {
  std::uint32_t loc = 0;
  std::vector<Int> state;
};

struct TraceStep {
  std::uint32_t tid = 0;
  Config after;
};

struct Trace {
  Config start;
  std::vector<TraceStep> steps;
};

/// One evaluation step: fires iff the configuration sits at the transition's
/// source and the guard holds; updates are exact integer evaluation.
inline std::optional<Config> eval_step(const Program& p, const Config& c, const Transition& t) {
  if (c.loc != t.source) return std::nullopt;
  if (!guard_eval(t.guard, c.state)) return std::nullopt;
  Config n;
  n.loc = t.target;
  n.state.reserve(p.vars.size());
  for (auto& u : t.update) {
    Rational v = poly_eval(u, c.state);
    if (!is_integer(v)) throw std::logic_error("eval_step: non-integer update value");
    n.state.push_back(num(v));
  }
  return n;
}

/// Picks among enabled transitions (indices into Program::transitions).
using Scheduler = std::function<std::size_t(const std::vector<std::size_t>&, std::uint64_t)>;

inline Scheduler first_enabled_scheduler() {
  return [](const std::vector<std::size_t>& enabled, std::uint64_t) { return enabled[0]; };
}

inline Scheduler seeded_scheduler(std::uint64_t seed) {
  return [state = seed](const std::vector<std::size_t>& enabled, std::uint64_t) mutable {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return enabled[(state >> 33) % enabled.size()];
  };
}

/// Maximal run from the initial location, up to maxSteps.
inline Trace run(const Program& p, std::vector<Int> s0, std::uint64_t maxSteps,
                 Scheduler sched = {}) {
  if (!sched) sched = first_enabled_scheduler();
  Trace tr;
  tr.start = {p.initial, std::move(s0)};
  Config cur = tr.start;
  for (std::uint64_t step = 0; step < maxSteps; ++step) {
    std::vector<std::size_t> enabled;
    for (std::size_t i = 0; i < p.transitions.size(); ++i) {
      const Transition& t = p.transitions[i];
      if (t.source == cur.loc && guard_eval(t.guard, cur.state)) enabled.push_back(i);
    }
    if (enabled.empty()) break;
    std::size_t pick = sched(enabled, step);
    auto next = eval_step(p, cur, p.transitions[pick]);
    tr.steps.push_back({p.transitions[pick].id, *next});
    cur = std::move(*next);
  }
  return tr;
}

struct LoopOfTransition {
  Loop loop;
  std::vector<VarId> varmap;  // loop variable i  ->  program variable varmap[i]
};

/// Self-loop transition as a standalone loop over the variables it reads or
/// writes. Declines when a touched variable's update reads outside that set:
/// the loop view would lose information about those reads.
inline std::optional<LoopOfTransition> loop_of_transition(const Program& p,
                                                          const Transition& t) {
  if (t.source != t.target) return std::nullopt;
  std::set<VarId> core;
  guard_vars(t.guard, core);
  for (VarId v = 0; v < t.update.size(); ++v)
    if (!(t.update[v] == Polynomial::var(v))) core.insert(v);

  for (VarId v : core)
    for (VarId r : t.update[v].vars())
      if (!core.count(r)) return std::nullopt;

  LoopOfTransition out;
  out.varmap.assign(core.begin(), core.end());
  std::map<VarId, Polynomial> back;  // program var -> loop var
  for (std::size_t i = 0; i < out.varmap.size(); ++i)
    back[out.varmap[i]] = Polynomial::var(static_cast<VarId>(i));

  std::function<Guard(const Guard&)> reindex = [&](const Guard& g) {
    Guard r = g;
    if (r.kind == Guard::Kind::Atom) {
      r.atom = poly_compose(r.atom, back);
      return r;
    }
    for (auto& k : r.kids) k = reindex(k);
    return r;
  };
  out.loop.guard = reindex(t.guard);
  for (VarId v : out.varmap) out.loop.update.push_back(poly_compose(t.update[v], back));
  return out;
}

}  // namespace itsbound

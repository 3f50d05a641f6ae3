#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "itsbound/parser.hpp"
#include "itsbound/ranking.hpp"

using namespace itsbound;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load(const std::string& name) {
  return parse_program(slurp(std::string(SAMPLES_DIR) + "/" + name));
}

Polynomial pv(VarId v) { return Polynomial::var(v); }
Polynomial pc(long k) { return Polynomial::constant(Rational(k)); }

const std::vector<std::string> names5 = {"x1", "x2", "x3", "x4", "x5"};

// Fourier-Motzkin feasibility of a*x <= b over the rationals; each row holds
// the coefficients with the right-hand side at index dim.
bool fm_feasible(std::vector<RatVec> rows, std::size_t dim) {
  for (std::size_t v = 0; v < dim; ++v) {
    std::vector<RatVec> pos, neg, next;
    for (auto& r : rows) {
      if (r[v] > 0)
        pos.push_back(r);
      else if (r[v] < 0)
        neg.push_back(r);
      else
        next.push_back(r);
    }
    for (auto& p : pos)
      for (auto& q : neg) {
        RatVec r(dim + 1);
        for (std::size_t k = 0; k <= dim; ++k) r[k] = Rational(-q[v]) * p[k] + p[v] * q[k];
        next.push_back(std::move(r));
      }
    rows = std::move(next);
  }
  for (auto& r : rows)
    if (r[dim] < 0) return false;
  return true;
}

LinearSystem make_sys(const std::vector<RatVec>& rows, std::size_t dim) {
  LinearSystem sys;
  sys.a = RatMatrix(rows.size(), dim);
  sys.b.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) sys.a.at(i, j) = rows[i][j];
    sys.b[i] = rows[i][dim];
  }
  return sys;
}

bool satisfies(const LinearSystem& sys, const RatVec& x) {
  for (std::size_t i = 0; i < sys.a.rows; ++i) {
    Rational lhs = 0;
    for (std::size_t j = 0; j < sys.a.cols; ++j) lhs += sys.a.at(i, j) * x[j];
    if (lhs > sys.b[i]) return false;
  }
  return true;
}

Loop t4_loop() {
  return Loop{g_atom(pv(0)), {pv(0) - pc(1), pv(1), pv(2), pv(3), pv(4)}};
}
Loop t3_loop() {
  return Loop{g_atom(pv(4) - pc(1)), {pv(4) * 2, pv(4) * 3, pv(4), pv(2), pv(4) - pc(1)}};
}
Loop t2_loop() { return Loop{g_true(), {pv(0), pv(1), pv(2), pv(3), pv(4)}}; }

}  // namespace

TEST_CASE("exact simplex on small systems") {
  SECTION("interval") {
    LinearSystem sys = make_sys({{Rational(1), Rational(3)}, {Rational(-1), Rational(-1)}}, 1);
    LpResult r = lp_solve(sys);
    REQUIRE(r.kind == LpResult::Kind::Feasible);
    CHECK(r.point[0] >= 1);
    CHECK(r.point[0] <= 3);

    sys.objective = RatVec{Rational(1)};
    r = lp_solve(sys);
    REQUIRE(r.kind == LpResult::Kind::Feasible);
    CHECK(r.point[0] == 1);

    sys.objective = RatVec{Rational(-1)};
    r = lp_solve(sys);
    REQUIRE(r.kind == LpResult::Kind::Feasible);
    CHECK(r.point[0] == 3);
  }

  SECTION("contradiction") {
    LinearSystem sys = make_sys({{Rational(1), Rational(-1)}, {Rational(-1), Rational(-1)}}, 1);
    CHECK(lp_solve(sys).kind == LpResult::Kind::Infeasible);
  }

  SECTION("zero row decides alone") {
    CHECK(lp_solve(make_sys({{Rational(0), Rational(-1)}}, 1)).kind ==
          LpResult::Kind::Infeasible);
    CHECK(lp_solve(make_sys({{Rational(0), Rational(2)}}, 1)).kind == LpResult::Kind::Feasible);
  }

  SECTION("redundant equality pins the point") {
    LinearSystem sys = make_sys(
        {{Rational(1), Rational(0)}, {Rational(-1), Rational(0)}, {Rational(1), Rational(5)}}, 1);
    LpResult r = lp_solve(sys);
    REQUIRE(r.kind == LpResult::Kind::Feasible);
    CHECK(r.point[0] == 0);
  }

  SECTION("unbounded direction still yields a witness") {
    LinearSystem sys = make_sys({{Rational(-1), Rational(0)}}, 1);
    sys.objective = RatVec{Rational(-1)};
    LpResult r = lp_solve(sys);
    REQUIRE(r.kind == LpResult::Kind::Unbounded);
    CHECK(satisfies(sys, r.point));
  }

  SECTION("optimum on a face") {
    LinearSystem sys = make_sys({{Rational(1), Rational(1), Rational(2)},
                                 {Rational(-1), Rational(0), Rational(0)},
                                 {Rational(0), Rational(-1), Rational(0)}},
                                2);
    sys.objective = RatVec{Rational(-1), Rational(-1)};
    LpResult r = lp_solve(sys);
    REQUIRE(r.kind == LpResult::Kind::Feasible);
    CHECK(satisfies(sys, r.point));
    CHECK(Rational(r.point[0] + r.point[1]) == 2);
  }

  SECTION("empty system") {
    LinearSystem sys;
    CHECK(lp_solve(sys).kind == LpResult::Kind::Feasible);
  }
}

TEST_CASE("simplex agrees with elimination on random systems") {
  std::mt19937 rng(20260814);
  std::uniform_int_distribution<int> dimd(1, 4), rowd(1, 6), cd(-3, 3), bd(-5, 5);
  for (int iter = 0; iter < 500; ++iter) {
    std::size_t dim = dimd(rng), m = rowd(rng);
    std::vector<RatVec> rows(m, RatVec(dim + 1));
    for (auto& r : rows) {
      for (std::size_t j = 0; j < dim; ++j) r[j] = cd(rng);
      r[dim] = bd(rng);
    }
    LinearSystem sys = make_sys(rows, dim);
    LpResult res = lp_solve(sys);
    bool oracle = fm_feasible(rows, dim);
    REQUIRE(res.feasible() == oracle);
    if (res.feasible()) REQUIRE(satisfies(sys, res.point));
  }
}

TEST_CASE("ranking function synthesis") {
  SECTION("countdown tail is ranked by its counter") {
    Loop t4 = t4_loop();
    LpResult raw = lp_solve(farkas_encode({t4}, {t4}));
    CHECK(raw.kind == LpResult::Kind::Feasible);

    auto f = find_lrf({t4}, {t4});
    REQUIRE(f);
    CHECK(f->coeffs == std::map<VarId, Rational>{{0, Rational(1)}});
    CHECK(f->constant == 0);
    CHECK(lrf_certifies(*f, {t4}, {t4}));
    CHECK(bound_str(local_runtime_from_lrf(*f), names5) == "x1+1");
  }

  SECTION("refill cycle is ranked by the refill budget") {
    Loop t3 = t3_loop(), t2 = t2_loop();
    auto f = find_lrf({t3}, {t2, t3});
    REQUIRE(f);
    CHECK(f->coeffs == std::map<VarId, Rational>{{4, Rational(1)}});
    CHECK(f->constant == 0);
    CHECK(bound_str(local_runtime_from_lrf(*f), names5) == "x5+1");
  }

  SECTION("growing counter has no certificate") {
    Loop up{g_atom(pv(0)), {pv(0) + pc(1)}};
    CHECK(lp_solve(farkas_encode({up}, {up})).kind == LpResult::Kind::Infeasible);
    CHECK(!find_lrf({up}, {up}));
  }

  SECTION("one function covers both disjuncts") {
    Loop two{g_or({g_atom(pv(0)), g_atom(pv(0) - pc(5))}), {pv(0) - pc(1)}};
    auto f = find_lrf({two}, {two});
    REQUIRE(f);
    CHECK(f->coeffs == std::map<VarId, Rational>{{0, Rational(1)}});
    CHECK(bound_str(local_runtime_from_lrf(*f), {"x1"}) == "x1+1");
  }

  SECTION("disjuncts with clashing free directions decline") {
    Loop both{g_or({g_atom(pv(0)), g_atom(pv(1))}), {pv(0) - pc(1), pv(1) - pc(1)}};
    CHECK(!find_lrf({both}, {both}));
  }

  SECTION("nonlinear pieces decline") {
    Loop sq{g_atom(pv(0) * pv(0)), {pv(0) - pc(1)}};
    CHECK(!find_lrf({sq}, {sq}));
    Loop nu{g_atom(pv(0)), {pv(0) * pv(0) - pc(1)}};
    CHECK(!find_lrf({nu}, {nu}));
  }

  SECTION("constants fold into the bound") {
    LinearRankingFunction f;
    f.coeffs[2] = 1;
    f.constant = -1;
    CHECK(bound_str(local_runtime_from_lrf(f), names5) == "x3+2");
  }

  SECTION("doubling keeps the certificate, never shrinks the bound") {
    Loop t4 = t4_loop(), t3 = t3_loop(), t2 = t2_loop();
    auto f = find_lrf({t3}, {t2, t3});
    REQUIRE(f);
    LinearRankingFunction g = *f;
    for (auto& [v, c] : g.coeffs) c *= 2;
    g.constant *= 2;
    CHECK(lrf_certifies(g, {t3}, {t2, t3}));
    BoundExpr bf = local_runtime_from_lrf(*f), bg = local_runtime_from_lrf(g);
    std::mt19937 rng(7);
    std::uniform_int_distribution<long> sd(0, 40);
    for (int k = 0; k < 40; ++k) {
      std::vector<Int> s;
      for (int v = 0; v < 5; ++v) s.push_back(Int(sd(rng)));
      CHECK(bound_eval(bf, s).leq(bound_eval(bg, s)));
    }
    LinearRankingFunction h;
    h.coeffs[0] = 2;
    CHECK(lrf_certifies(h, {t4}, {t4}));
  }
}

TEST_CASE("certified bounds hold on program runs") {
  Program p = load("refill_cascade.koat");
  REQUIRE(p.transitions.size() == 5);

  SECTION("replaying the staged run") {
    Trace tr = run(p, {-6, -8, 2, 1, 1}, 100);
    std::vector<std::uint32_t> tids;
    for (auto& st : tr.steps) tids.push_back(st.tid);
    CHECK(tids == std::vector<std::uint32_t>{0, 1, 1, 2, 4, 4, 4, 4, 4, 4});
    CHECK(tr.steps.back().after.state == std::vector<Int>{0, 8, 0, 6, 1});
  }

  SECTION("refill transition never fires above its certificate") {
    // nothing in the program increases the budget x5, so the local bound
    // x5+1 caps the total firings of the refill transition in any run
    Loop t3 = t3_loop(), t2 = t2_loop();
    BoundExpr cap = *ranking_runtime_bound({t3}, {t2, t3});
    std::mt19937 rng(99);
    std::uniform_int_distribution<long> wide(-8, 8), narrow(0, 6);
    for (int k = 0; k < 60; ++k) {
      std::vector<Int> s0 = {Int(wide(rng)), Int(wide(rng)), Int(narrow(rng)), Int(wide(rng)),
                             Int(narrow(rng))};
      std::vector<Int> mag;
      for (auto& q : s0) mag.push_back(Int(abs(q)));
      Trace tr = run(p, s0, 20000, seeded_scheduler(1000 + k));
      Int fired = 0;
      for (auto& st : tr.steps)
        if (st.tid == 3) ++fired;
      REQUIRE(NatOrOmega::of(fired).leq(bound_eval(cap, mag)));
    }
  }
}

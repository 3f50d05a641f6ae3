#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "itsbound/matrix.hpp"
#include "itsbound/rational.hpp"

namespace itsbound {

/// Constraints a*x <= b over free rational variables, plus an optional
/// linear objective to minimize.
struct LinearSystem {
  RatMatrix a;
  RatVec b;
  std::optional<RatVec> objective;

  std::size_t rows() const { return a.rows; }
  std::size_t cols() const { return a.cols; }
};

struct LpResult {
  enum class Kind { Infeasible, Feasible, Unbounded };

  Kind kind = Kind::Infeasible;
  /// One value per column of the system; with an objective present it is the
  /// minimizer (Feasible) or a feasible point on an unbounded ray (Unbounded).
  RatVec point;

  bool feasible() const { return kind != Kind::Infeasible; }
};

namespace detail {

/// Full tableau for min c*y s.t. M*y = d, y >= 0, d >= 0.  Each row stores
/// its coefficients plus the right-hand side at index n; obj holds reduced
/// costs with -(objective value) at index n.
struct SimplexTableau {
  std::size_t n = 0;
  std::vector<RatVec> row;
  std::vector<std::size_t> basis;
  RatVec obj;

  // f by value: callers pass entries of dst itself
  static void sub_multiple(RatVec& dst, const RatVec& src, Rational f) {
    if (f == 0) return;
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] -= f * src[k];
  }

  void pivot(std::size_t r, std::size_t j) {
    RatVec& pr = row[r];
    Rational pv = pr[j];
    for (auto& q : pr) q /= pv;
    for (std::size_t i = 0; i < row.size(); ++i)
      if (i != r) sub_multiple(row[i], pr, row[i][j]);
    sub_multiple(obj, pr, obj[j]);
    basis[r] = j;
  }

  enum class Step { Optimal, Pivoted, Unbounded };

  /// One Bland pivot: smallest negative-reduced-cost column enters, the
  /// minimum-ratio row with the smallest basic index leaves.  Cannot cycle.
  Step step() {
    std::size_t enter = n;
    for (std::size_t j = 0; j < n; ++j)
      if (obj[j] < 0) {
        enter = j;
        break;
      }
    if (enter == n) return Step::Optimal;
    std::size_t leave = row.size();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i][enter] <= 0) continue;
      if (leave == row.size()) {
        leave = i;
        continue;
      }
      Rational cur = row[i][n] / row[i][enter];
      Rational best = row[leave][n] / row[leave][enter];
      if (cur < best || (cur == best && basis[i] < basis[leave])) leave = i;
    }
    if (leave == row.size()) return Step::Unbounded;
    pivot(leave, enter);
    return Step::Pivoted;
  }

  Step run_to_optimum() {
    Step s;
    while ((s = step()) == Step::Pivoted) {
    }
    return s;
  }
};

}  // namespace detail

/// Exact two-phase simplex with Bland pivoting.  Free variables are split
/// into nonnegative pairs internally; infeasibility means the phase-1
/// optimum stayed positive.
inline LpResult lp_solve(const LinearSystem& sys) {
  std::size_t m = sys.a.rows, n = sys.a.cols;
  std::size_t nReal = 2 * n + m;  // x+ | x- | slacks, then artificials
  detail::SimplexTableau t;
  t.n = nReal + m;
  t.row.assign(m, RatVec(t.n + 1, Rational(0)));
  t.basis.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    Rational s = sys.b[i] < 0 ? -1 : 1;
    for (std::size_t j = 0; j < n; ++j) {
      Rational v = s * sys.a.at(i, j);
      t.row[i][j] = v;
      t.row[i][n + j] = -v;
    }
    t.row[i][2 * n + i] = s;
    t.row[i][nReal + i] = 1;
    t.row[i][t.n] = s * sys.b[i];
    t.basis[i] = nReal + i;
  }

  t.obj.assign(t.n + 1, Rational(0));
  for (std::size_t i = 0; i < m; ++i) t.obj[nReal + i] = 1;
  for (std::size_t i = 0; i < m; ++i)
    detail::SimplexTableau::sub_multiple(t.obj, t.row[i], t.obj[t.basis[i]]);
  if (t.run_to_optimum() != detail::SimplexTableau::Step::Optimal)
    throw std::logic_error("lp_solve: phase 1 unbounded");
  if (t.obj[t.n] < 0) return {LpResult::Kind::Infeasible, {}};

  // Pivot leftover artificials out; a row that resists is redundant.
  for (std::size_t i = 0; i < t.row.size();) {
    if (t.basis[i] < nReal) {
      ++i;
      continue;
    }
    std::size_t j = 0;
    while (j < nReal && t.row[i][j] == 0) ++j;
    if (j < nReal) {
      t.pivot(i, j);
      ++i;
    } else {
      t.row.erase(t.row.begin() + i);
      t.basis.erase(t.basis.begin() + i);
    }
  }
  for (auto& r : t.row) r.erase(r.begin() + nReal, r.begin() + t.n);
  t.n = nReal;

  LpResult out;
  out.kind = LpResult::Kind::Feasible;
  if (sys.objective) {
    t.obj.assign(t.n + 1, Rational(0));
    for (std::size_t j = 0; j < n; ++j) {
      t.obj[j] = (*sys.objective)[j];
      t.obj[n + j] = -(*sys.objective)[j];
    }
    for (std::size_t i = 0; i < t.row.size(); ++i)
      detail::SimplexTableau::sub_multiple(t.obj, t.row[i], t.obj[t.basis[i]]);
    if (t.run_to_optimum() == detail::SimplexTableau::Step::Unbounded)
      out.kind = LpResult::Kind::Unbounded;
  }

  RatVec val(t.n, Rational(0));
  for (std::size_t i = 0; i < t.row.size(); ++i) val[t.basis[i]] = t.row[i][t.n];
  out.point.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.point[j] = val[j] - val[n + j];
  return out;
}

namespace detail {

/// Appends magnitude columns m_j with |x_j| <= m_j for the first k columns
/// and minimizes their sum; used to pick small certificates.
inline LinearSystem with_l1_objective(const LinearSystem& sys, std::size_t k) {
  LinearSystem out;
  out.a = RatMatrix(sys.a.rows + 2 * k, sys.a.cols + k);
  out.b = sys.b;
  out.b.resize(sys.a.rows + 2 * k, Rational(0));
  for (std::size_t i = 0; i < sys.a.rows; ++i)
    for (std::size_t j = 0; j < sys.a.cols; ++j) out.a.at(i, j) = sys.a.at(i, j);
  for (std::size_t j = 0; j < k; ++j) {
    out.a.at(sys.a.rows + 2 * j, j) = 1;
    out.a.at(sys.a.rows + 2 * j, sys.a.cols + j) = -1;
    out.a.at(sys.a.rows + 2 * j + 1, j) = -1;
    out.a.at(sys.a.rows + 2 * j + 1, sys.a.cols + j) = -1;
  }
  RatVec c(sys.a.cols + k, Rational(0));
  for (std::size_t j = 0; j < k; ++j) c[sys.a.cols + j] = 1;
  out.objective = std::move(c);
  return out;
}

}  // namespace detail
}  // namespace itsbound

#pragma once

#include <cassert>
#include <optional>
#include <vector>

#include "itsbound/rational.hpp"
#include "itsbound/unipoly.hpp"

namespace itsbound {

using RatVec = std::vector<Rational>;

struct RatMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<Rational> a;

  RatMatrix() = default;
  RatMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, Rational(0)) {}

  Rational& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const Rational& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static RatMatrix identity(std::size_t n) {
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  bool operator==(const RatMatrix& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
};

inline RatMatrix mat_mul(const RatMatrix& x, const RatMatrix& y) {
  assert(x.cols == y.rows);
  RatMatrix r(x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t k = 0; k < x.cols; ++k) {
      const Rational& v = x.at(i, k);
      if (v == 0) continue;
      for (std::size_t j = 0; j < y.cols; ++j) r.at(i, j) += v * y.at(k, j);
    }
  return r;
}

inline RatVec mat_vec(const RatMatrix& m, const RatVec& v) {
  assert(m.cols == v.size());
  RatVec r(m.rows, Rational(0));
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) r[i] += m.at(i, j) * v[j];
  return r;
}

inline RatMatrix mat_add(const RatMatrix& x, const RatMatrix& y) {
  assert(x.rows == y.rows && x.cols == y.cols);
  RatMatrix r = x;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
  return r;
}

inline RatMatrix mat_scale(const RatMatrix& x, const Rational& c) {
  RatMatrix r = x;
  for (auto& v : r.a) v *= c;
  return r;
}

inline RatMatrix mat_pow(const RatMatrix& m, std::uint64_t e) {
  assert(m.rows == m.cols);
  RatMatrix r = RatMatrix::identity(m.rows), b = m;
  while (e) {
    if (e & 1) r = mat_mul(r, b);
    e >>= 1;
    if (e) b = mat_mul(b, b);
  }
  return r;
}

inline Rational mat_trace(const RatMatrix& m) {
  Rational t = 0;
  for (std::size_t i = 0; i < m.rows; ++i) t += m.at(i, i);
  return t;
}

/// In-place reduced row echelon form; returns pivot column indices.
inline std::vector<std::size_t> rref(RatMatrix& m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols && row < m.rows; ++col) {
    std::size_t sel = row;
    while (sel < m.rows && m.at(sel, col) == 0) ++sel;
    if (sel == m.rows) continue;
    for (std::size_t j = 0; j < m.cols; ++j) std::swap(m.at(sel, j), m.at(row, j));
    Rational inv = Rational(1) / m.at(row, col);
    for (std::size_t j = col; j < m.cols; ++j) m.at(row, j) *= inv;
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == row || m.at(i, col) == 0) continue;
      Rational f = m.at(i, col);
      for (std::size_t j = col; j < m.cols; ++j) m.at(i, j) -= f * m.at(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline std::size_t mat_rank(RatMatrix m) { return rref(m).size(); }

/// Basis of the right null space, one vector per free column.
inline std::vector<RatVec> nullspace(RatMatrix m) {
  std::vector<std::size_t> pivots = rref(m);
  std::vector<bool> is_pivot(m.cols, false);
  for (auto c : pivots) is_pivot[c] = true;
  std::vector<RatVec> basis;
  for (std::size_t free = 0; free < m.cols; ++free) {
    if (is_pivot[free]) continue;
    RatVec v(m.cols, Rational(0));
    v[free] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m.at(r, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

inline std::optional<RatMatrix> mat_inverse(const RatMatrix& m) {
  assert(m.rows == m.cols);
  std::size_t n = m.rows;
  RatMatrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, n + i) = 1;
  }
  std::vector<std::size_t> pivots = rref(aug);
  if (pivots.size() != n || pivots.back() != n - 1) return std::nullopt;
  RatMatrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv.at(i, j) = aug.at(i, n + j);
  return inv;
}

/// Monic characteristic polynomial via the Faddeev-LeVerrier recurrence.
inline UniPoly char_poly(const RatMatrix& A) {
  assert(A.rows == A.cols);
  std::size_t d = A.rows;
  std::vector<Rational> c(d + 1, Rational(0));
  c[d] = 1;
  RatMatrix M(d, d);
  for (std::size_t k = 1; k <= d; ++k) {
    M = mat_mul(A, M);
    for (std::size_t i = 0; i < d; ++i) M.at(i, i) += c[d - k + 1];
    c[d - k] = -mat_trace(mat_mul(A, M)) / Rational(static_cast<long>(k));
  }
  UniPoly p;
  p.c = std::move(c);
  p.normalize();
  return p;
}

/// True when the characteristic polynomial factors completely into integer
/// roots (counted with multiplicity).
inline bool spectrum_is_integer(const RatMatrix& A) {
  UniPoly cp = char_poly(A);
  if (cp.degree() < 0) return false;
  return total_multiplicity(integer_roots(cp)) == static_cast<std::uint32_t>(cp.degree());
}

struct JordanBlock {
  Int lambda;
  std::uint32_t size;
};

struct JordanForm {
  RatMatrix Q;     // columns: generalized eigenvector chains
  RatMatrix Qinv;  // Qinv * A * Q = J
  RatMatrix J;
  std::vector<JordanBlock> blocks;
};

/// Jordan decomposition for matrices with fully integer spectrum. Chains are
/// built level by level from the longest: at nilpotency level j we pick kernel
/// vectors of (A - lambda I)^j independent modulo ker^(j-1) plus the chain
/// elements carried down from longer chains, then each head u yields columns
/// N^(j-1) u, ..., N u, u.
inline std::optional<JordanForm> jordan_form(const RatMatrix& A) {
  assert(A.rows == A.cols);
  std::size_t d = A.rows;
  UniPoly cp = char_poly(A);
  auto roots = integer_roots(cp);
  if (total_multiplicity(roots) != d) return std::nullopt;

  JordanForm jf;
  jf.Q = RatMatrix(d, d);
  std::size_t col = 0;

  for (auto& [lambda, mult] : roots) {
    RatMatrix N = A;
    for (std::size_t i = 0; i < d; ++i) N.at(i, i) -= Rational(lambda);

    // kernels of N^1, N^2, ... until the eigenvalue's full multiplicity
    std::vector<std::vector<RatVec>> kernels;  // kernels[j] = basis of ker N^(j+1)
    RatMatrix Np = N;
    while (true) {
      kernels.push_back(nullspace(Np));
      if (kernels.back().size() >= mult) break;
      if (kernels.size() > d) return std::nullopt;  // defensive; cannot happen
      Np = mat_mul(Np, N);
    }
    std::size_t s = kernels.size();

    // span tracker: rows of an incrementally extended matrix
    RatMatrix span(0, d);
    auto add_if_independent = [&](const RatVec& v) {
      RatMatrix trial(span.rows + 1, d);
      trial.a = span.a;
      trial.a.insert(trial.a.end(), v.begin(), v.end());
      if (mat_rank(trial) > span.rows) {
        span = std::move(trial);
        rref(span);
        return true;
      }
      return false;
    };

    struct Head {
      RatVec u;
      std::uint32_t len;
    };
    std::vector<Head> heads;

    for (std::size_t j = s; j >= 1; --j) {
      span = RatMatrix(0, d);
      if (j >= 2)
        for (auto& v : kernels[j - 2]) add_if_independent(v);
      for (auto& h : heads) {
        RatVec v = h.u;
        for (std::uint32_t t = 0; t < h.len - j; ++t) v = mat_vec(N, v);
        add_if_independent(v);
      }
      for (auto& w : kernels[j - 1]) {
        if (add_if_independent(w))
          heads.push_back({w, static_cast<std::uint32_t>(j)});
      }
    }

    for (auto& h : heads) {
      std::vector<RatVec> chain;  // u, N u, ..., N^(len-1) u
      chain.push_back(h.u);
      for (std::uint32_t t = 1; t < h.len; ++t) chain.push_back(mat_vec(N, chain.back()));
      for (std::uint32_t t = 0; t < h.len; ++t) {
        const RatVec& q = chain[h.len - 1 - t];
        for (std::size_t i = 0; i < d; ++i) jf.Q.at(i, col) = q[i];
        ++col;
      }
      jf.blocks.push_back({lambda, h.len});
    }
  }
  if (col != d) return std::nullopt;

  auto inv = mat_inverse(jf.Q);
  if (!inv) return std::nullopt;
  jf.Qinv = *inv;
  jf.J = mat_mul(jf.Qinv, mat_mul(A, jf.Q));
  return jf;
}

/// Least p <= cap with A^p having fully integer spectrum.
inline std::optional<std::uint32_t> period_of(const RatMatrix& A, std::uint32_t cap = 360) {
  assert(A.rows == A.cols);
  RatMatrix B = A;
  for (std::uint32_t p = 1; p <= cap; ++p) {
    if (spectrum_is_integer(B)) return p;
    if (p < cap) B = mat_mul(B, A);
  }
  return std::nullopt;
}

}  // namespace itsbound

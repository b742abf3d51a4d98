#include "monolab/detail/simplex.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace monolab::detail {

namespace {

constexpr double kPivotEps = 1e-11;

struct Tableau {
  Mat T;                      // rows 0..m-1 constraints, row m objective; last column rhs
  std::vector<int> basis;     // basic column per row
  int m = 0;
  int ncols = 0;              // structural + artificial columns

  void pivot(int r, int c) {
    T.row(r) /= T(r, c);
    for (int i = 0; i <= m; ++i) {
      if (i != r && T(i, c) != 0.0) T.row(i) -= T(i, c) * T.row(r);
    }
    basis[r] = c;
  }

  // Bland's rule over columns [0, limit). Returns false on unboundedness.
  LpStatus run(int limit, int& pivots, int max_pivots) {
    const int rhs = ncols;
    while (pivots < max_pivots) {
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (T(m, j) < -kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::optimal;
      int leave = -1;
      double best = kInf;
      for (int i = 0; i < m; ++i) {
        if (T(i, enter) > kPivotEps) {
          const double ratio = T(i, rhs) / T(i, enter);
          if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      pivot(leave, enter);
      ++pivots;
    }
    return LpStatus::iteration_limit;
  }
};

}  // namespace

LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c, int max_pivots) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) throw DimensionError("solve_lp: inconsistent dimensions");

  Tableau tb;
  tb.m = m;
  tb.ncols = n + m;
  tb.T = Mat::Zero(m + 1, n + m + 1);
  tb.basis.assign(m, 0);
  for (int i = 0; i < m; ++i) {
    const double sgn = b[i] < 0 ? -1.0 : 1.0;
    tb.T.block(i, 0, 1, n) = sgn * A.row(i);
    tb.T(i, n + i) = 1.0;
    tb.T(i, n + m) = sgn * b[i];
    tb.basis[i] = n + i;
  }
  // Phase 1 objective: sum of artificials, expressed in nonbasic columns.
  for (int i = 0; i < m; ++i) tb.T.row(m) -= tb.T.row(i);
  for (int i = 0; i < m; ++i) tb.T(m, n + i) = 0.0;

  LpResult res;
  LpStatus st = tb.run(n + m, res.pivots, max_pivots);
  if (st == LpStatus::iteration_limit) {
    res.status = st;
    return res;
  }
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (-tb.T(m, n + m) > 1e-9 * scale) {
    res.status = LpStatus::infeasible;
    return res;
  }
  // Drive artificials out of the basis; rows with no structural pivot are redundant.
  std::vector<bool> keep(m, true);
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < n) continue;
    int col = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tb.T(i, j)) > 1e-9) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tb.pivot(i, col);
    } else {
      keep[i] = false;
    }
  }
  // Phase 2 with artificial columns frozen out.
  Tableau t2;
  int m2 = 0;
  for (int i = 0; i < m; ++i) m2 += keep[i] ? 1 : 0;
  t2.m = m2;
  t2.ncols = n;
  t2.T = Mat::Zero(m2 + 1, n + 1);
  t2.basis.clear();
  for (int i = 0, r = 0; i < m; ++i) {
    if (!keep[i]) continue;
    t2.T.block(r, 0, 1, n) = tb.T.block(i, 0, 1, n);
    t2.T(r, n) = tb.T(i, n + m);
    t2.basis.push_back(tb.basis[i]);
    ++r;
  }
  t2.T.block(m2, 0, 1, n) = c.transpose();
  for (int r = 0; r < m2; ++r) {
    const double cb = c[t2.basis[r]];
    if (cb != 0.0) t2.T.row(m2) -= cb * t2.T.row(r);
  }
  st = t2.run(n, res.pivots, max_pivots);
  res.status = st;
  if (st != LpStatus::optimal) return res;
  res.x = Vec::Zero(n);
  for (int r = 0; r < m2; ++r) res.x[t2.basis[r]] = std::max(0.0, t2.T(r, n));
  res.value = c.dot(res.x);
  return res;
}

}  // namespace monolab::detail

#pragma once

#include "monolab/spaces.hpp"

namespace monolab::detail {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = kInf;
  Vec x;
  int pivots = 0;
};

/// min c'x subject to A x = b, x >= 0. Dense two-phase tableau simplex with
/// Bland's rule; intended for the small programs built in this library.
LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c, int max_pivots = 100000);

}  // namespace monolab::detail

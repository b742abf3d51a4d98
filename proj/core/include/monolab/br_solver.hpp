#pragma once

#include <optional>
#include <string>
#include <vector>

#include "monolab/functions.hpp"
#include "monolab/spaces.hpp"

namespace monolab {

struct BRRequest {
  ConvexFn h;
  Vec u;
  double alpha = 1.0;
  double beta = 1.0;
  NormTag norm = NormTag::L2;  ///< primal norm; x* is measured in its dual
};

struct BRResult {
  Vec s;
  Vec xstar;
  /// One subgradient per leaf of flatten(h) at s; they sum to x* up to the
  /// inner solver residual.
  std::vector<Vec> parts;
  double slack_value = -kInf;  ///< h(u) - h(s)
  double slack_dist = -kInf;   ///< alpha - ||s - u||
  double slack_slope = -kInf;  ///< beta - ||x*||_*
  std::optional<double> slack_inf;  ///< inf h + beta - h(s) (corollary form)
  Tri membership = Tri::unknown;    ///< (s, x*) in G(dh) within 1e-7
  bool ok = false;
  int iterations = 0;
  std::string warning;  ///< set when inf h was not certified
};

/// (s, x*) in G(dh) with h(s) <= h(u), ||s - u|| <= alpha, ||x*|| <= beta.
/// Proximal iterations on h + beta ||. - u||, whose minimizers all satisfy the
/// three certificates; the first iterate that does is returned. Throws
/// when h(u) >= inf h + alpha beta. After 1000 steps returns the best
/// iterate with ok = false.
BRResult br_point(const BRRequest& req);

/// h(s) <= inf h + beta and ||x*|| <= beta, via br_point with alpha = 1 from
/// a point u with h(u) < inf h + beta.
BRResult br_corollary(const ConvexFn& h, double beta, NormTag norm = NormTag::L2);

struct VanResult {
  PairedPoint point;
  /// 1/2||s||^2 + <s, s*> + 1/2||s*||^2 (or its translate for witnesses).
  double quantity = kInf;
  double M = 0.0;
  double beta = 0.0;
  Tri membership = Tri::unknown;
  bool flagged = false;  ///< minorant constants were estimated, not exact
  BRResult br;
};

/// (s, s*) in G(dg) with 1/2||s||^2 + <s, s*> + 1/2||s*||^2 < eps, from
/// br_corollary on g + 1/2||.||^2 and a split of its subgradient.
VanResult van_point(const ConvexFn& g, double eps, NormTag norm = NormTag::L2);

/// (s, s*) in G(df) with r-objective at (x, x*) below eps, by van_point on
/// f(. + x) - <., x*> and a shift back.
VanResult quasidense_witness(const ConvexFn& f, const Vec& x, const Vec& xstar, double eps,
                             NormTag norm = NormTag::L2);

}  // namespace monolab

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "monolab/operators.hpp"

namespace monolab {

/// The interior of a closed convex set with nonempty interior, on one side of the pair.
class LocalWindow {
 public:
  static LocalWindow ball(Vec center, double radius, Side side);
  /// Rejects vertex sets whose hull is not full-dimensional.
  static LocalWindow polytope(std::vector<Vec> vertices, Side side);

  const CompactConvexSet& region() const noexcept { return region_; }
  Side side() const noexcept { return side_; }
  int dim() const noexcept { return region_.dim(); }
  /// Strict containment.
  bool contains(const Vec& y) const;

 private:
  LocalWindow(CompactConvexSet r, Side s) : region_(std::move(r)), side_(s) {}
  CompactConvexSet region_;
  Side side_;
};

struct ClassifierVerdict {
  bool premise_holds = false;
  /// Sampled minimum of <s - w, s* - w*> over graph points in the window.
  double worst = kInf;
  std::optional<PairedPoint> witness;
  Tri conclusion_holds = Tri::unknown;
  bool consistent_with_class = true;
  bool vacuous = false;  ///< no graph sample landed in the window
  int in_window = 0;
  int budget = 0;
  std::uint64_t seed = 0;
};

/// Type (FPV) instance: graph points with s in U that are monotonically
/// related to (w, w*) should force (w, w*) into G(S).
ClassifierVerdict check_fpv(const MonotoneOperator& S, const LocalWindow& U, const Vec& w, const Vec& wstar,
                            int budget, std::uint64_t seed);

/// Type (FP) instance: the window sits on the range side (s* in U~).
ClassifierVerdict check_fp(const MonotoneOperator& S, const LocalWindow& Ut, const Vec& w, const Vec& wstar,
                           int budget, std::uint64_t seed);

struct NiResult {
  double value = kInf;    ///< best estimate of the infimum
  double sampled = kInf;  ///< minimum over graph samples
  std::optional<double> dual;  ///< <w*, w**> - theta_S(w*, w**) when theta is exact
  std::optional<PairedPoint> witness;
};

/// inf over G(S) of <s* - w*, s - w**>.
NiResult ni_infimum(const MonotoneOperator& S, const Vec& wstar, const Vec& wstarstar, int budget,
                    std::uint64_t seed);

struct StrongMaxVerdict {
  bool premise_holds = false;
  double worst = kInf;  ///< sampled minimum of the premise's max-term
  std::optional<PairedPoint> witness;
  /// yes: a member of the set was found; unknown: premise failed or search capped.
  Tri outcome = Tri::unknown;
  std::optional<Vec> found;
  double residual = kInf;  ///< membership residual of the found pair
  int samples = 0;
};

/// Premise: max over Wt of <s - w, s* - w~> >= 0 on sampled graph points;
/// then searches w* in Wt with (w, w*) in G(S).
StrongMaxVerdict strong_max_dual(const MonotoneOperator& S, const Vec& w, const CompactConvexSet& Wt, int budget,
                                 std::uint64_t seed);

/// Premise: max over W of <s - w, s* - w*> >= 0; then searches w in W with (w, w*) in G(S).
StrongMaxVerdict strong_max_primal(const MonotoneOperator& S, const CompactConvexSet& W, const Vec& wstar, int budget,
                                   std::uint64_t seed);

struct SeqcharVerdict {
  bool consistent = false;
  std::optional<int> counterexample;  ///< index of the first failing term
  double pairing_error = kInf;        ///< |<s_n - w, s_n* - w*> - <z* - w*, z** - w>| at the last term
  double dual_error = kInf;           ///< ||s_n* - z*|| at the last term
};

/// Checks that <s_n - w, s_n* - w*> -> <z* - w*, z** - w> and ||s_n* - z*|| -> 0
/// on the final quarter of the sequence. Each error must be non-increasing up
/// to tol there, and the last error must be within tol + 4 * (its spread over
/// the final quarter). Throws for fewer than 8 terms or off-graph terms.
SeqcharVerdict seqchar_check(const MonotoneOperator& S, const Vec& zstar, const Vec& zstarstar,
                             const std::vector<PairedPoint>& sequence, const Vec& w, const Vec& wstar,
                             double tol = 1e-7);

}  // namespace monolab

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monolab/operators.hpp"

namespace monolab {

struct GapQuery {
  PairedPoint target;
  std::optional<CompactConvexSet> dual_fuzz;    ///< replaces x* (dual side)
  std::optional<CompactConvexSet> primal_fuzz;  ///< replaces x (primal side)
  double eta = 1e-6;
};

enum class GapStatus { exact, upper_bound };
enum class GapMethod { enumeration, resolvent, subgradient_descent, pattern_search };

std::string to_string(GapStatus s);
std::string to_string(GapMethod m);

struct GapReport {
  double value = kInf;
  PairedPoint witness;
  GapStatus status = GapStatus::upper_bound;
  GapMethod method = GapMethod::enumeration;
  int steps = 0;
  int restarts = 0;
};

struct GapOptions {
  std::uint64_t seed = 1;
  int starts = 8;             ///< descent restarts
  int max_steps = 100000;     ///< steps per restart
  int stall_steps = 20000;    ///< stop a restart after this many steps without progress
  int budget = 200;           ///< graph samples seeding the searches
  int pattern_evals = 1500;   ///< objective evaluations per pattern search
};

/// inf over G(S) of 1/2||s-x||^2 + 1/2||s*-x*||^2 + <s-x, s*-x*> in the
/// pair's norms. Enumeration on finite graphs, the resolvent on Euclidean
/// pairs, subgradient descent over s (with s* = M s) for non-Euclidean linear
/// maps, and pattern search over resolvent parameters otherwise. A fuzz set
/// in the query routes to the matching fuzzy gap.
GapReport gap(const MonotoneOperator& S, const GapQuery& q, const GapOptions& opts = {});
GapReport gap(const MonotoneOperator& S, const PairedPoint& target, const GapOptions& opts = {});

/// 1/2 ||(s + s*) - (x + x*)||_2^2 at the resolvent point; Euclidean pairs only
/// (throws otherwise). Absent when the resolvent fails.
std::optional<GapReport> gap_euclidean_oracle(const MonotoneOperator& S, const PairedPoint& target);

/// 1/2||s-w||^2 + 1/2 dist(s*, Wt)^2 + max over Wt of <s-w, s*-w~>.
double fuzzy_dual_objective(const DualPair& pair, const PairedPoint& sp, const Vec& w, const CompactConvexSet& Wt);
/// 1/2 dist(s, W)^2 + 1/2||s*-w*||^2 + max over W of <s-w, s*-w*>.
double fuzzy_primal_objective(const DualPair& pair, const PairedPoint& sp, const CompactConvexSet& W,
                              const Vec& wstar);

GapReport fuzzy_gap_dual(const MonotoneOperator& S, const Vec& w, const CompactConvexSet& Wt,
                         const GapOptions& opts = {});
GapReport fuzzy_gap_primal(const MonotoneOperator& S, const CompactConvexSet& W, const Vec& wstar,
                           const GapOptions& opts = {});

struct QuasidenseReport {
  std::vector<GapReport> reports;
  std::vector<bool> pass;
  int passed = 0;
  bool all_pass = true;
  /// Only ever a statement about the probe set.
  std::string summary;
};

QuasidenseReport is_quasidense(const MonotoneOperator& S, const std::vector<PairedPoint>& probes, double eta,
                               const GapOptions& opts = {});

/// Seeded probe cloud in [-R, R]^(2n).
std::vector<PairedPoint> default_probes(int dim, int count, std::uint64_t seed, double radius = 4.0);

}  // namespace monolab

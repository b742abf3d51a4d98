#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "monolab/convex_sets.hpp"
#include "monolab/functions.hpp"
#include "monolab/spaces.hpp"
#include "monolab/verdict.hpp"

namespace monolab {

class MonotoneOperator;
using OperatorPtr = std::shared_ptr<const MonotoneOperator>;

struct FiniteGraph {
  std::vector<PairedPoint> points;
};

/// x -> M x.
struct Linear {
  Mat M;
};

struct Subdifferential {
  ConvexFn f;
};

/// The subdifferential of the indicator of K.
struct NormalCone {
  CompactConvexSet K;
};

/// The subdifferential of the support function of Kt (a dual-side set).
struct SupportSubdiff {
  CompactConvexSet Kt;
};

/// G(Shift) = G(inner) - (dx, dxstar).
struct Shift {
  OperatorPtr inner;
  Vec dx;
  Vec dxstar;
};

struct SumOp {
  OperatorPtr S;
  OperatorPtr T;
};

struct InverseOp {
  OperatorPtr inner;
};

/// (S^-1 + T^-1)^-1, evaluated through `equivalent`.
struct ParallelSum {
  OperatorPtr S;
  OperatorPtr T;
  OperatorPtr equivalent;
};

/// A multifunction E => E* given by one of several graph representations.
/// Immutable; combinators share their operands.
class MonotoneOperator {
 public:
  using Node = std::variant<FiniteGraph, Linear, Subdifferential, NormalCone, SupportSubdiff, Shift, SumOp, InverseOp,
                            ParallelSum>;

  static OperatorPtr finite_graph(const DualPair& pair, std::vector<PairedPoint> points);
  static OperatorPtr linear(const DualPair& pair, Mat M);
  static OperatorPtr subdifferential(const DualPair& pair, ConvexFn f);
  static OperatorPtr normal_cone(const DualPair& pair, CompactConvexSet K);
  static OperatorPtr support_subdiff(const DualPair& pair, CompactConvexSet Kt);
  static OperatorPtr shift(OperatorPtr inner, Vec dx, Vec dxstar);
  static OperatorPtr sum(OperatorPtr S, OperatorPtr T);
  static OperatorPtr inverse(OperatorPtr inner);
  static OperatorPtr parallel_sum(OperatorPtr S, OperatorPtr T);

  const DualPair& pair() const noexcept { return pair_; }
  int dim() const noexcept { return pair_.dim(); }
  const Node& node() const noexcept { return node_; }
  std::string describe() const;

  MonotoneOperator(Node n, DualPair p) : node_(std::move(n)), pair_(p) {}

 private:
  Node node_;
  DualPair pair_;
};

/// The truncated tail operator (T x)_i = sum_{j >= i} x_j, by default on the L1/LInf pair.
OperatorPtr tail_operator(int n, NormTag primal = NormTag::L1);

/// A point (s, s*) of the graph with s + lambda s* = z (approximately).
struct ResolventPoint {
  PairedPoint point;
  double residual = 0.0;  ///< distance of s + lambda s* from z, or inner solver residual
  bool exact = true;
  bool converged = true;
};

/// Euclidean resolvent (I + lambda S)^-1 z, reported as a graph point.
/// FiniteGraph returns the nearest graph point with its residual. Absent when
/// the inner solve is impossible (singular system, failed splitting).
std::optional<ResolventPoint> resolvent(const MonotoneOperator& S, const Vec& z, double lambda = 1.0);

struct SampleOptions {
  double radius = 2.0;            ///< primal cloud half-width; resolvent clouds use twice this
  std::optional<Vec> center;      ///< center of the sampling cloud (z = s + s* space)
};

struct GraphSample {
  std::vector<PairedPoint> points;
  int failures = 0;
};

/// Seeded, deterministic graph points. Every point of a FiniteGraph;
/// (x, Mx) for Linear; resolvent images of a z-cloud otherwise, plus exact
/// face points for normal cones and support subdifferentials.
GraphSample graph_sample(const MonotoneOperator& S, int budget, std::uint64_t seed, const SampleOptions& opts = {});

/// Graph points J(z) for each given z (lambda = 1).
GraphSample graph_sample_at(const MonotoneOperator& S, const std::vector<Vec>& zs);

struct MonotoneVerdict {
  bool ok = true;
  double min_pairing = kInf;
  std::optional<std::pair<PairedPoint, PairedPoint>> witness;
  int samples = 0;
  std::string basis = "sampled";
};

/// All-pairs test of <s - t, s* - t*> >= -1e-10 on graph_sample.
MonotoneVerdict monotone_check(const MonotoneOperator& S, int budget, std::uint64_t seed);

/// ||J(x + x*) - x||_2; zero exactly on the graph of a maximal operator.
double membership_residual(const MonotoneOperator& S, const Vec& x, const Vec& xstar);

/// (x, x*) in G(S), decided per variant: lookup, Fenchel-Young, or resolvent
/// residual for combinators.
Tri contains(const MonotoneOperator& S, const Vec& x, const Vec& xstar, double tol = 1e-7);

/// x lies in int D(S) (cross test of half-width delta on the domain).
Tri domain_interior_contains(const MonotoneOperator& S, const Vec& x, double delta = 1e-7);
/// x* lies in int R(S).
Tri range_interior_contains(const MonotoneOperator& S, const Vec& xstar, double delta = 1e-7);

}  // namespace monolab

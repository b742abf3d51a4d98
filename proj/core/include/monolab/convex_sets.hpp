#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "monolab/rng.hpp"
#include "monolab/spaces.hpp"

namespace monolab {

/// Convex hull of a nonempty vertex list.
struct Polytope {
  std::vector<Vec> vertices;
};

/// {z : ||z - center||_norm <= radius}.
struct Ball {
  Vec center;
  double radius = 0.0;
  NormTag norm = NormTag::L2;
};

/// Minkowski sum of the segment [a, b] and a norm ball of the given radius.
struct Capsule {
  Vec a;
  Vec b;
  double radius = 0.0;
  NormTag norm = NormTag::L2;
};

/// A nonempty compact convex subset of R^n, tagged with the side (E or E*)
/// it lives on. Immutable once built.
class CompactConvexSet {
 public:
  using Shape = std::variant<Polytope, Ball, Capsule>;

  static CompactConvexSet polytope(std::vector<Vec> vertices, Side side = Side::primal);
  static CompactConvexSet ball(Vec center, double radius, NormTag norm, Side side = Side::primal);
  static CompactConvexSet capsule(Vec a, Vec b, double radius, NormTag norm, Side side = Side::primal);
  static CompactConvexSet singleton(Vec point, Side side = Side::primal);
  /// [lo, hi] as a subset of R.
  static CompactConvexSet interval(double lo, double hi, Side side = Side::primal);
  /// Axis-aligned box; stored as a polytope, so dim is capped at 12.
  static CompactConvexSet box(const Vec& lo, const Vec& hi, Side side = Side::primal);

  int dim() const noexcept { return dim_; }
  Side side() const noexcept { return side_; }
  const Shape& shape() const noexcept { return shape_; }

  CompactConvexSet negated() const;
  CompactConvexSet on_side(Side s) const;

  /// The point when the set has exactly one element.
  std::optional<Vec> singleton_point() const;
  /// Some point of the set (vertex centroid, center, or segment midpoint).
  Vec center_point() const;
  /// Upper bound on the Euclidean diameter.
  double diameter_bound() const;
  /// Candidate points useful as search seeds: vertices, segment ends, center.
  std::vector<Vec> seed_points() const;

 private:
  CompactConvexSet(Shape shape, int dim, Side side) : shape_(std::move(shape)), dim_(dim), side_(side) {}

  Shape shape_;
  int dim_;
  Side side_;
};

/// max over z in s of <z, y>.
double support(const CompactConvexSet& s, const Vec& y);

/// A maximizer of <., y> over s. Polytope ties resolve to the
/// lexicographically smallest vertex; balls return center + radius * g where
/// g is the canonical dual-gradient point of y.
Vec argmax_support(const CompactConvexSet& s, const Vec& y);

/// Euclidean nearest point of s to y.
Vec project(const CompactConvexSet& s, const Vec& y);

struct DistOptions {
  int max_iter = 10000;
  double tol = 1e-9;
};

struct DistResult {
  double value = 0.0;        ///< best distance found (an upper bound)
  double lower_bound = 0.0;  ///< certified lower bound
  bool exact = false;
  bool converged = true;
  int iterations = 0;
};

/// inf over z in s of ||y - z||_norm. Closed form where available, otherwise
/// projected subgradient descent with a dual certificate for the lower bound.
DistResult dist(const CompactConvexSet& s, const Vec& y, NormTag norm, const DistOptions& opts = {});

/// Euclidean distance to s is at most tol.
bool contains(const CompactConvexSet& s, const Vec& y, double tol = 1e-9);

/// y lies in the interior with room for a cross of half-width `margin`.
bool interior_contains(const CompactConvexSet& s, const Vec& y, double margin = 1e-7);

/// A random point of s (not uniformly distributed).
Vec sample_point(const CompactConvexSet& s, Rng& rng);

namespace detail {

/// Nearest point to the origin in conv(points) by Wolfe's algorithm.
/// Writes barycentric weights to `weights` when given.
Vec min_norm_point(const std::vector<Vec>& points, Vec* weights = nullptr);

/// Euclidean projection onto {z : ||z||_1 <= radius}.
Vec project_l1_ball(const Vec& v, double radius);

}  // namespace detail

}  // namespace monolab

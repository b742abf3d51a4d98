#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "monolab/operators.hpp"

namespace monolab {

// Throughout, E** is identified with E, so (y*, y**) is a pair of vectors
// of the same length and the canonical map is the component swap.

enum class FitzStatus { exact, lower_bound };

std::string to_string(FitzStatus s);

struct FitzEvaluation {
  double value = -kInf;
  FitzStatus status = FitzStatus::exact;
  /// Best known upper bound; equals value when exact.
  double upper = kInf;
  /// Graph point attaining (or approaching) the sup.
  std::optional<PairedPoint> witness;
  /// Graph direction along which the sup is unbounded.
  std::optional<Vec> direction;
  /// Convex weights over the graph points realizing a conjugate value.
  std::optional<Vec> weights;
};

struct FitzOptions {
  int budget = 300;
  std::uint64_t seed = 1;
  int ascent_evals = 400;
};

/// phi_S(x, x*) = sup over G(S) of <s, x*> + <x, s*> - <s, s*>.
FitzEvaluation phi(const MonotoneOperator& S, const Vec& x, const Vec& xstar, const FitzOptions& opts = {});

/// The conjugate of phi_S at (y*, y**). Exact for finite graphs (LP), affine
/// operators and subdifferentials of norms, indicators and support functions.
/// Other subdifferentials report the lower bound f*(y*) + f(y**), with an
/// upper bound from the LP over sampled graph points. Throws for operators
/// with no such path.
FitzEvaluation phi_conj(const MonotoneOperator& S, const Vec& ystar, const Vec& ystarstar,
                        const FitzOptions& opts = {});

/// theta_S(w*, w**) = sup over G(S) of <s, w*> + <s*, w**> - <s, s*>,
/// which is phi_S(w**, w*).
FitzEvaluation theta(const MonotoneOperator& S, const Vec& wstar, const Vec& wstarstar, const FitzOptions& opts = {});

/// theta_S*(w**, w*), which is phi_S*(w*, w**).
FitzEvaluation theta_conj(const MonotoneOperator& S, const Vec& wstarstar, const Vec& wstar,
                          const FitzOptions& opts = {});

struct FitzVerdict {
  Tri verdict = Tri::unknown;
  double theta = 0.0;        ///< best value of theta_S(y*, y**)
  double theta_upper = kInf;
  double pairing = 0.0;
  FitzStatus status = FitzStatus::exact;
};

/// (y*, y**) in G(S^F), decided by theta_S(y*, y**) <= <y*, y**> + tol.
FitzVerdict fitz_membership(const MonotoneOperator& S, const Vec& ystar, const Vec& ystarstar, double tol = 1e-7,
                            const FitzOptions& opts = {});

namespace detail {

/// max_i of the affine pieces of phi for a finite graph, with the argmax index.
std::pair<double, std::size_t> finite_phi(const std::vector<PairedPoint>& pts, const Vec& x, const Vec& xstar);

/// Conjugate of finite_phi by linear programming over convex weights.
FitzEvaluation finite_phi_conj(const std::vector<PairedPoint>& pts, const Vec& ystar, const Vec& ystarstar);

}  // namespace detail

}  // namespace monolab

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "monolab/convex_sets.hpp"
#include "monolab/spaces.hpp"
#include "monolab/verdict.hpp"

namespace monolab {

class ConvexFn;

/// 1/2 x'Qx + b'x + c with Q symmetric positive semidefinite.
struct Quadratic {
  struct Eig {
    Mat vectors;
    Vec values;
  };
  Mat Q;
  Vec b;
  double c = 0.0;
  std::shared_ptr<const Eig> eig;
};

/// scale * ||x||_norm.
struct NormFn {
  int dim = 1;
  double scale = 1.0;
  NormTag norm = NormTag::L2;
};

/// x -> max <x, K>.
struct SupportFn {
  CompactConvexSet set;
};

/// 0 on K, +inf elsewhere.
struct IndicatorFn {
  CompactConvexSet set;
};

/// <a, x> + c.
struct Affine {
  Vec a;
  double c = 0.0;
};

/// 1/2 ||x||_norm^2.
struct HalfSqNorm {
  int dim = 1;
  NormTag norm = NormTag::L2;
};

/// x -> inner(x + shift) - <x, tilt>.
struct Translate {
  std::shared_ptr<const ConvexFn> inner;
  Vec shift;
  Vec tilt;
};

struct SumFn {
  std::shared_ptr<const ConvexFn> f;
  std::shared_ptr<const ConvexFn> g;
};

/// A proper convex lower semicontinuous function on R^n. Cheap to copy;
/// composite nodes share their children.
class ConvexFn {
 public:
  using Node = std::variant<Quadratic, NormFn, SupportFn, IndicatorFn, Affine, HalfSqNorm, Translate, SumFn>;

  /// Rejects non-symmetric or indefinite Q (relative tolerance 1e-10).
  static ConvexFn quadratic(Mat Q, Vec b, double c = 0.0);
  static ConvexFn norm(int dim, double scale, NormTag norm);
  static ConvexFn support(CompactConvexSet set);
  static ConvexFn indicator(CompactConvexSet set);
  static ConvexFn affine(Vec a, double c = 0.0);
  static ConvexFn zero(int dim);
  static ConvexFn half_sq_norm(int dim, NormTag norm = NormTag::L2);
  static ConvexFn translate(ConvexFn inner, Vec shift, Vec tilt);
  static ConvexFn sum(ConvexFn f, ConvexFn g);

  int dim() const noexcept { return dim_; }
  const Node& node() const noexcept { return node_; }
  /// Short label, e.g. "quadratic" or "sum(norm,indicator)".
  std::string describe() const;

 private:
  ConvexFn(Node n, int dim) : node_(std::move(n)), dim_(dim) {}

  Node node_;
  int dim_;
};

/// Effective-domain test tolerance for indicator-like variants.
inline constexpr double kDomainTol = 1e-9;

double eval(const ConvexFn& f, const Vec& x);
bool in_domain(const ConvexFn& f, const Vec& x);

enum class ConjStatus { exact, bounded, unbounded };

/// f*(y). For exact and unbounded results lower == upper == value. For
/// numeric results value == lower is attained at a primal point and upper
/// comes from a dual split (possibly +inf).
struct ConjugateValue {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  ConjStatus status = ConjStatus::exact;
  /// Recession direction x with <x, y> - f(x) unbounded along it.
  std::optional<Vec> direction;
  /// A point attaining (or approaching) the sup of <x, y> - f(x).
  std::optional<Vec> argmax;
};

ConjugateValue conjugate(const ConvexFn& f, const Vec& y);

/// Fenchel-Young test f(x) + f*(x*) <= <x, x*> + tol, three-valued when the
/// conjugate is only bracketed.
Tri subdiff_contains(const ConvexFn& f, const Vec& x, const Vec& xstar, double tol = 1e-7);

struct ProxResult {
  Vec point;
  /// One subgradient per leaf of flatten(f), each at `point` up to `residual`;
  /// their sum equals (z - point) / t.
  std::vector<Vec> parts;
  bool exact = true;
  bool converged = true;
  double residual = 0.0;
  int iterations = 0;
};

/// argmin f(s) + ||s - z||^2 / (2t) in the Euclidean metric.
ProxResult prox(const ConvexFn& f, const Vec& z, double t = 1.0);

/// Summands of nested SumFn nodes, left to right.
std::vector<ConvexFn> flatten(const ConvexFn& f);

/// True for variants with an everywhere-defined gradient.
bool is_smooth(const ConvexFn& f);
std::optional<Vec> gradient(const ConvexFn& f, const Vec& x);

/// f(x) >= -gamma0 ||x||_norm - delta0 from one subgradient pair.
struct Minorant {
  double gamma0 = 0.0;
  double delta0 = 0.0;
  bool exact = true;
};
Minorant minorant(const ConvexFn& f, NormTag norm);

/// Bracket on inf f: lower is certified when `certified`; upper is f at `argmin`.
struct InfBound {
  double lower = -kInf;
  double upper = kInf;
  Vec argmin;
  bool certified = false;
};
InfBound inf_bound(const ConvexFn& f);

/// The conjugate as a ConvexFn for families with a closed form.
std::optional<ConvexFn> conjugate_fn(const ConvexFn& f);

/// A point of dom f (the prox of the origin).
Vec domain_point(const ConvexFn& f);

namespace detail {

struct SplitOptions {
  double gamma = 1.0;
  double tol = 1e-12;
  int max_iter = 20000;
};

struct SplitResult {
  Vec x;
  std::vector<Vec> points;    ///< per-term prox outputs at the last step
  std::vector<Vec> subgrads;  ///< per-term subgradients at `points`
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  double residual = 0.0;
};

/// Minimizes sum_i f_i(x) + rho/2 ||x - center||^2 by Douglas-Rachford on
/// the consensus product space.
SplitResult minimize_sum(const std::vector<ConvexFn>& terms, double rho, const Vec& center,
                         const SplitOptions& opts = {});

}  // namespace detail

}  // namespace monolab

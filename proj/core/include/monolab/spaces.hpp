#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace monolab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when vector lengths disagree with the owning space.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class NormTag { L1, L2, LInf };

/// The paired tag: L1 <-> LInf, L2 <-> L2.
constexpr NormTag dual(NormTag t) noexcept {
  switch (t) {
    case NormTag::L1: return NormTag::LInf;
    case NormTag::LInf: return NormTag::L1;
    case NormTag::L2: break;
  }
  return NormTag::L2;
}

std::string_view to_string(NormTag t) noexcept;
/// Accepts "L1", "L2", "LInf" (case-insensitive, also "l_inf"/"linf"/"inf").
NormTag parse_norm_tag(std::string_view s);

/// Norm of a vector for the given tag.
double norm_value(NormTag t, const Vec& v);

/// A dual norm subgradient: a vector g with ||g||_dual(t) <= 1 and
/// <g, v> = ||v||_t. For v = 0 returns the zero vector.
Vec norm_subgradient(NormTag t, const Vec& v);

enum class Side { primal, dual };

/// E = R^n with a chosen primal norm; E* = R^n with the dual norm.
class DualPair {
 public:
  DualPair(int dim, NormTag primal);
  /// Rejects any dual tag other than dual(primal).
  DualPair(int dim, NormTag primal, NormTag dual_norm);

  int dim() const noexcept { return dim_; }
  NormTag primal_norm() const noexcept { return primal_; }
  NormTag dual_norm() const noexcept { return dual_; }
  NormTag norm_for(Side s) const noexcept { return s == Side::primal ? primal_ : dual_; }

  /// True when both norms are Euclidean. In one dimension every tag is |.|.
  bool euclidean() const noexcept { return primal_ == NormTag::L2 || dim_ == 1; }

  /// The pair seen from the dual side (E*, E** = E under reflexive identification).
  DualPair swapped() const noexcept { return DualPair(dim_, dual_); }

  void check(const Vec& v, std::string_view what = "vector") const;

  friend bool operator==(const DualPair&, const DualPair&) = default;

 private:
  int dim_;
  NormTag primal_;
  NormTag dual_;
};

/// An element (x, x*) of E x E*.
struct PairedPoint {
  Vec x;
  Vec xstar;
};

double pairing(const DualPair& p, const Vec& x, const Vec& xstar);
double norm(const DualPair& p, const Vec& v, Side side);
/// sqrt(||x||^2 + ||x*||^2), the product norm on E x E*.
double graph_norm(const DualPair& p, const PairedPoint& pt);

/// The quasidensity objective 1/2||s-x||^2 + 1/2||s*-x*||^2 + <s-x, s*-x*>.
double r_objective(const DualPair& p, const PairedPoint& graph_point, const PairedPoint& target);

}  // namespace monolab

#include "monolab/spaces.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace monolab {

std::string_view to_string(NormTag t) noexcept {
  switch (t) {
    case NormTag::L1: return "L1";
    case NormTag::L2: return "L2";
    case NormTag::LInf: return "LInf";
  }
  return "?";
}

NormTag parse_norm_tag(std::string_view s) {
  std::string k;
  for (char c : s) {
    if (c != '_' && c != '-') k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (k == "l1") return NormTag::L1;
  if (k == "l2") return NormTag::L2;
  if (k == "linf" || k == "inf" || k == "linfty") return NormTag::LInf;
  throw std::invalid_argument("unknown norm tag '" + std::string(s) + "'");
}

double norm_value(NormTag t, const Vec& v) {
  if (v.size() == 0) return 0.0;
  switch (t) {
    case NormTag::L1: return v.lpNorm<1>();
    case NormTag::L2: return v.norm();
    case NormTag::LInf: return v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

Vec norm_subgradient(NormTag t, const Vec& v) {
  Vec g = Vec::Zero(v.size());
  switch (t) {
    case NormTag::L1:
      for (Eigen::Index i = 0; i < v.size(); ++i) g[i] = v[i] > 0 ? 1.0 : (v[i] < 0 ? -1.0 : 0.0);
      break;
    case NormTag::L2: {
      const double n = v.norm();
      if (n > 0) g = v / n;
      break;
    }
    case NormTag::LInf: {
      if (v.size() == 0) break;
      Eigen::Index idx = 0;
      v.cwiseAbs().maxCoeff(&idx);
      if (v[idx] != 0) g[idx] = v[idx] > 0 ? 1.0 : -1.0;
      break;
    }
  }
  return g;
}

DualPair::DualPair(int dim, NormTag primal) : DualPair(dim, primal, monolab::dual(primal)) {}

DualPair::DualPair(int dim, NormTag primal, NormTag dual_norm)
    : dim_(dim), primal_(primal), dual_(dual_norm) {
  if (dim < 1) throw std::invalid_argument("DualPair dimension must be positive");
  if (dual_norm != monolab::dual(primal)) {
    throw std::invalid_argument("dual norm " + std::string(to_string(dual_norm)) + " is not the dual of " +
                                std::string(to_string(primal)));
  }
}

void DualPair::check(const Vec& v, std::string_view what) const {
  if (v.size() != dim_) {
    throw DimensionError(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                         std::to_string(dim_));
  }
}

double pairing(const DualPair& p, const Vec& x, const Vec& xstar) {
  p.check(x, "x");
  p.check(xstar, "x*");
  return x.dot(xstar);
}

double norm(const DualPair& p, const Vec& v, Side side) {
  p.check(v);
  return norm_value(p.norm_for(side), v);
}

double graph_norm(const DualPair& p, const PairedPoint& pt) {
  const double a = norm(p, pt.x, Side::primal);
  const double b = norm(p, pt.xstar, Side::dual);
  return std::hypot(a, b);
}

double r_objective(const DualPair& p, const PairedPoint& g, const PairedPoint& t) {
  p.check(g.x, "s");
  p.check(g.xstar, "s*");
  p.check(t.x, "x");
  p.check(t.xstar, "x*");
  const Vec a = g.x - t.x;
  const Vec b = g.xstar - t.xstar;
  const double na = norm_value(p.primal_norm(), a);
  const double nb = norm_value(p.dual_norm(), b);
  return 0.5 * na * na + 0.5 * nb * nb + a.dot(b);
}

}  // namespace monolab

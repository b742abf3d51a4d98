#include "monolab/br_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace monolab {

namespace {

constexpr int kMaxOuter = 1000;
constexpr double kMemberTol = 1e-7;
constexpr double kSlackTol = 1e-12;

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
}

Vec sum_of(const std::vector<Vec>& parts, std::size_t count, Eigen::Index n) {
  Vec out = Vec::Zero(n);
  for (std::size_t i = 0; i < count; ++i) out += parts[i];
  return out;
}

// Fenchel-Young on h, falling back to the leaves: a sum of leaf subgradients
// lies in the subdifferential of the sum.
Tri membership(const ConvexFn& h, const Vec& s, const Vec& xstar, const std::vector<Vec>& parts) {
  const Tri direct = subdiff_contains(h, s, xstar, kMemberTol);
  if (direct == Tri::yes) return direct;
  const auto leaves = flatten(h);
  if (leaves.size() < 2 || parts.size() != leaves.size()) return direct;
  if ((sum_of(parts, parts.size(), s.size()) - xstar).norm() > 1e-9 * (1.0 + xstar.norm())) return direct;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (subdiff_contains(leaves[i], s, parts[i], kMemberTol) != Tri::yes) return direct;
  }
  return Tri::yes;
}

struct Baseline {
  double value;
  bool certified;
};

// inf h for precondition checks: the certified lower bound, else the best
// value found.
Baseline baseline(const ConvexFn& h) {
  const InfBound ib = inf_bound(h);
  if (ib.lower == -kInf) throw std::invalid_argument("h is unbounded below");
  return {ib.certified ? ib.lower : ib.upper, ib.certified};
}

void measure(BRResult& r, const BRRequest& req, double hu) {
  const NormTag dn = dual(req.norm);
  r.slack_value = hu - eval(req.h, r.s);
  r.slack_dist = req.alpha - norm_value(req.norm, Vec(r.s - req.u));
  r.slack_slope = req.beta - norm_value(dn, r.xstar);
  r.membership = membership(req.h, r.s, r.xstar, r.parts);
  r.ok = r.slack_value >= -kSlackTol && r.slack_dist >= -kSlackTol && r.slack_slope >= -kSlackTol &&
         r.membership == Tri::yes;
}

double worst_slack(const BRResult& r) { return std::min({r.slack_value, r.slack_dist, r.slack_slope}); }

// x* = 0 when s already minimizes h (a fixed point of its prox).
bool try_zero_slope(BRResult& r, const ConvexFn& h) {
  const ProxResult p = prox(h, r.s, 1.0);
  if ((p.point - r.s).norm() > 1e-12 * (1.0 + r.s.norm())) return false;
  r.xstar = Vec::Zero(r.s.size());
  r.parts = p.parts;
  return true;
}

}  // namespace

BRResult br_point(const BRRequest& req) {
  const int n = req.h.dim();
  if (req.u.size() != n) throw DimensionError("u has the wrong length for h");
  check_positive(req.alpha, "alpha");
  check_positive(req.beta, "beta");
  const double hu = eval(req.h, req.u);
  if (!std::isfinite(hu)) throw std::invalid_argument("u is outside dom h");
  const Baseline base = baseline(req.h);
  if (!(hu < base.value + req.alpha * req.beta)) {
    throw std::invalid_argument("h(u) must be below inf h + alpha * beta");
  }

  // Every minimizer of h + b ||. - u|| with (h(u) - inf h) / alpha < b <= beta
  // meets the three certificates. The midpoint leaves slack on both sides
  // instead of a rounding-level tie at ||x*|| = beta.
  const double b = 0.5 * (req.beta + std::max(0.0, hu - base.value) / req.alpha);
  const ConvexFn phi =
      ConvexFn::sum(req.h, ConvexFn::translate(ConvexFn::norm(n, b, req.norm), Vec(-req.u), Vec::Zero(n)));
  const std::size_t m = flatten(req.h).size();

  BRResult best;
  best.s = req.u;
  best.xstar = Vec::Zero(n);
  Vec x = req.u;
  double t = req.alpha / b;
  const double t_max = 1e8 * t;
  for (int k = 1; k <= kMaxOuter; ++k) {
    const ProxResult p = prox(phi, x, t);
    BRResult cur;
    cur.s = p.point;
    cur.parts.assign(p.parts.begin(), p.parts.begin() + static_cast<std::ptrdiff_t>(m));
    cur.xstar = sum_of(cur.parts, m, n);
    cur.iterations = k;
    measure(cur, req, hu);
    if (cur.ok || cur.slack_slope >= -kSlackTol) {
      BRResult zero = cur;
      if (try_zero_slope(zero, req.h)) {
        measure(zero, req, hu);
        if (zero.ok) cur = std::move(zero);
      }
    }
    if (cur.ok) {
      if (!base.certified) cur.warning = "inf h not certified; checked against the best value found";
      return cur;
    }
    if (k == 1 || worst_slack(cur) > worst_slack(best)) best = cur;
    if ((p.point - x).norm() <= 1e-15 * (1.0 + x.norm()) && t >= t_max) break;
    x = p.point;
    t = std::min(2.0 * t, t_max);
  }
  best.warning = "iteration cap reached";
  if (!base.certified) best.warning += "; inf h not certified";
  return best;
}

BRResult br_corollary(const ConvexFn& h, double beta, NormTag norm) {
  check_positive(beta, "beta");
  const InfBound ib = inf_bound(h);
  if (ib.lower == -kInf) throw std::invalid_argument("h is unbounded below");
  const double bar = ib.certified ? ib.lower : ib.upper;

  Vec u = ib.argmin;
  double hu = eval(h, u);
  double t = 1.0;
  for (int k = 0; k < 200 && !(hu < bar + beta); ++k) {
    u = prox(h, u, t).point;
    hu = eval(h, u);
    t *= 2.0;
  }
  if (!(hu < bar + beta)) throw std::runtime_error("no point with h(u) < inf h + beta was found");

  BRResult r = br_point({h, u, 1.0, beta, norm});
  r.slack_inf = bar + beta - eval(h, r.s);
  r.ok = r.ok && *r.slack_inf >= -kSlackTol;
  return r;
}

VanResult van_point(const ConvexFn& g, double eps, NormTag norm) {
  check_positive(eps, "eps");
  const int n = g.dim();
  const DualPair pair(n, norm);
  const ConvexFn h = ConvexFn::sum(g, ConvexFn::half_sq_norm(n, norm));

  VanResult out;
  const Minorant mino = minorant(g, norm);
  out.flagged = !mino.exact;
  const double m_up = inf_bound(h).upper;
  out.M = mino.gamma0 + std::sqrt(mino.gamma0 * mino.gamma0 + 2.0 * (mino.delta0 + m_up + 1.0));
  double beta = std::min(1.0, eps / (2.0 * (2.0 * out.M + 1.0)));

  for (int attempt = 0; attempt < 5; ++attempt, beta /= 10.0) {
    BRResult br = br_corollary(h, beta, norm);
    const Vec& s = br.s;
    // The j-part of the split: the duality map at s.
    Vec v;
    if (pair.euclidean()) {
      v = s;
    } else if (norm == NormTag::L1) {
      const double r = s.lpNorm<1>();
      v = br.parts.back();
      for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = s[i] != 0.0 ? std::copysign(r, s[i]) : std::clamp(v[i], -r, r);
      }
    } else {
      v = br.parts.back();
    }
    const Vec sstar = br.xstar - v;
    out.point = {s, sstar};
    out.quantity = 0.5 * std::pow(norm_value(norm, s), 2) + s.dot(sstar) +
                   0.5 * std::pow(norm_value(dual(norm), sstar), 2);
    std::vector<Vec> gparts(br.parts.begin(), br.parts.end() - 1);
    out.membership = membership(g, s, sstar, gparts);
    out.beta = beta;
    out.br = std::move(br);
    if (out.br.ok && out.quantity < eps && out.membership == Tri::yes) return out;
  }
  return out;
}

VanResult quasidense_witness(const ConvexFn& f, const Vec& x, const Vec& xstar, double eps, NormTag norm) {
  const DualPair pair(f.dim(), norm);
  pair.check(x, "x");
  pair.check(xstar, "x*");
  VanResult r = van_point(ConvexFn::translate(f, x, xstar), eps, norm);
  r.point.x += x;
  r.point.xstar += xstar;
  r.quantity = r_objective(pair, r.point, {x, xstar});
  // G(dg) is G(df) shifted, so membership on the translate carries over.
  if (subdiff_contains(f, r.point.x, r.point.xstar, kMemberTol) == Tri::yes) r.membership = Tri::yes;
  return r;
}

}  // namespace monolab

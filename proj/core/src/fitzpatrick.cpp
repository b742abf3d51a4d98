#include "monolab/fitzpatrick.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "monolab/detail/overloaded.hpp"
#include "monolab/detail/simplex.hpp"

namespace monolab {

using detail::overloaded;

std::string to_string(FitzStatus s) { return s == FitzStatus::exact ? "exact" : "lower_bound"; }

namespace detail {

std::pair<double, std::size_t> finite_phi(const std::vector<PairedPoint>& pts, const Vec& x, const Vec& xstar) {
  double best = -kInf;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const double v = p.x.dot(xstar) + x.dot(p.xstar) - p.x.dot(p.xstar);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  return {best, arg};
}

FitzEvaluation finite_phi_conj(const std::vector<PairedPoint>& pts, const Vec& ystar, const Vec& ystarstar) {
  // phi = max_i <(s_i*, s_i), (x, x*)> - <s_i, s_i*>; its conjugate at y is
  // min sum l_i <s_i, s_i*> over l in the simplex with sum l_i (s_i*, s_i) = y.
  const int n = static_cast<int>(ystar.size());
  const int m = static_cast<int>(pts.size());
  Mat A(2 * n + 1, m);
  Vec b(2 * n + 1), c(m);
  for (int i = 0; i < m; ++i) {
    A.col(i).head(n) = pts[i].xstar;
    A.col(i).segment(n, n) = pts[i].x;
    A(2 * n, i) = 1.0;
    c[i] = pts[i].x.dot(pts[i].xstar);
  }
  b.head(n) = ystar;
  b.segment(n, n) = ystarstar;
  b[2 * n] = 1.0;
  const auto lp = detail::solve_lp(A, b, c);
  FitzEvaluation out;
  if (lp.status == LpStatus::infeasible) {
    out.value = out.upper = kInf;
    return out;
  }
  if (lp.status != LpStatus::optimal) throw std::runtime_error("phi_conj: linear program did not finish");
  out.value = out.upper = lp.value;
  out.weights = lp.x;
  return out;
}

}  // namespace detail

namespace {

struct AffineGrad {
  Mat Q;
  Vec b;
};

// grad f = Q x + b when every leaf of f is quadratic-like.
std::optional<AffineGrad> affine_gradient(const ConvexFn& f) {
  const int n = f.dim();
  return std::visit(overloaded{
                        [](const Quadratic& q) -> std::optional<AffineGrad> { return AffineGrad{q.Q, q.b}; },
                        [&](const Affine& a) -> std::optional<AffineGrad> {
                          return AffineGrad{Mat::Zero(n, n), a.a};
                        },
                        [&](const HalfSqNorm& h) -> std::optional<AffineGrad> {
                          if (h.norm != NormTag::L2 && n > 1) return std::nullopt;
                          return AffineGrad{Mat::Identity(n, n), Vec::Zero(n)};
                        },
                        [](const Translate& t) -> std::optional<AffineGrad> {
                          auto g = affine_gradient(*t.inner);
                          if (!g) return std::nullopt;
                          g->b += g->Q * t.shift - t.tilt;
                          return g;
                        },
                        [](const SumFn& s) -> std::optional<AffineGrad> {
                          auto a = affine_gradient(*s.f);
                          auto b = affine_gradient(*s.g);
                          if (!a || !b) return std::nullopt;
                          return AffineGrad{a->Q + b->Q, a->b + b->b};
                        },
                        [](const auto&) -> std::optional<AffineGrad> { return std::nullopt; },
                    },
                    f.node());
}

// phi(x, x*) = f(x) + f*(x*) holds for these families.
bool fy_exact(const ConvexFn& f) {
  return std::holds_alternative<NormFn>(f.node()) || std::holds_alternative<IndicatorFn>(f.node()) ||
         std::holds_alternative<SupportFn>(f.node());
}

FitzEvaluation exact(double v) {
  FitzEvaluation out;
  out.value = out.upper = v;
  return out;
}

// phi for s -> M s + b:  <x, b> + sup_s <s, q> - s' Msym s  with q = x* + M'x - b.
FitzEvaluation affine_phi(const Mat& M, const Vec& b, const Vec& x, const Vec& xstar) {
  const Mat Msym = 0.5 * (M + M.transpose());
  const Vec q = xstar + M.transpose() * x - b;
  Eigen::SelfAdjointEigenSolver<Mat> es(Msym);
  const Vec& lam = es.eigenvalues();
  const Mat& V = es.eigenvectors();
  const double scale = 1.0 + lam.cwiseAbs().maxCoeff();
  const Vec qc = V.transpose() * q;
  auto unbounded = [](Vec dir) {
    FitzEvaluation out = exact(kInf);
    out.direction = std::move(dir);
    return out;
  };
  Vec s = Vec::Zero(x.size());
  double val = x.dot(b);
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < -1e-12 * scale) return unbounded(V.col(i));
    if (lam[i] <= 1e-12 * scale) {
      if (std::abs(qc[i]) > 1e-9 * (1.0 + q.norm())) return unbounded(Vec((qc[i] > 0 ? 1.0 : -1.0) * V.col(i)));
      continue;
    }
    val += 0.25 * qc[i] * qc[i] / lam[i];
    s += 0.5 * qc[i] / lam[i] * V.col(i);
  }
  FitzEvaluation out = exact(val);
  out.witness = PairedPoint{s, Vec(M * s + b)};
  return out;
}

// phi* for s -> M s + b: <y*, y**> on the swapped graph, +inf off it.
FitzEvaluation affine_phi_conj(const Mat& M, const Vec& b, const Vec& ystar, const Vec& ystarstar) {
  const Vec img = M * ystarstar + b;
  const double tol = 1e-9 * (1.0 + ystar.lpNorm<Eigen::Infinity>() + img.lpNorm<Eigen::Infinity>());
  if ((img - ystar).lpNorm<Eigen::Infinity>() > tol) return exact(kInf);
  return exact(ystar.dot(ystarstar));
}

double fy_sum(const ConvexFn& f, const Vec& x, const Vec& xstar) {
  const double fx = eval(f, x);
  if (!std::isfinite(fx)) return kInf;
  const auto c = conjugate(f, xstar);
  return fx + c.value;
}

double objective(const PairedPoint& p, const Vec& x, const Vec& xstar) {
  return p.x.dot(xstar) + x.dot(p.xstar) - p.x.dot(p.xstar);
}

// Best sampled graph point, refined by a pattern search over resolvent parameters.
FitzEvaluation sampled_phi(const MonotoneOperator& S, const Vec& x, const Vec& xstar, const FitzOptions& opts,
                           double upper) {
  const double radius = std::max(2.0, x.lpNorm<Eigen::Infinity>() + xstar.lpNorm<Eigen::Infinity>());
  SampleOptions so;
  so.radius = radius;
  so.center = Vec(x + xstar);
  const auto sample = graph_sample(S, opts.budget, opts.seed, so);

  FitzEvaluation out;
  out.status = FitzStatus::lower_bound;
  out.upper = upper;
  for (const auto& p : sample.points) {
    const double v = objective(p, x, xstar);
    if (v > out.value) {
      out.value = v;
      out.witness = p;
    }
  }
  if (!out.witness) return out;

  Vec z = out.witness->x + out.witness->xstar;
  const Vec z0 = z;
  const double zcap = 1e4 * (radius + z0.lpNorm<Eigen::Infinity>());
  double h = radius / 4;
  int evals = 0;
  const Eigen::Index n = z.size();
  while (evals < opts.ascent_evals && h > 1e-10) {
    bool improved = false;
    for (Eigen::Index i = 0; i < n && evals < opts.ascent_evals; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vec zt = z;
        zt[i] += sgn * h;
        ++evals;
        // Far parameters only slow the inner solvers down.
        if (zt.lpNorm<Eigen::Infinity>() > zcap) continue;
        const auto r = resolvent(S, zt);
        if (!r || !r->converged || r->residual > 1e-6) continue;
        const double v = objective(r->point, x, xstar);
        if (v > out.value + 1e-15 * (1.0 + std::abs(out.value))) {
          out.value = v;
          out.witness = r->point;
          z = zt;
          improved = true;
          break;
        }
      }
    }
    if (out.value > 1e12) {
      out.value = kInf;
      out.direction = Vec(z - z0);
      return out;
    }
    h = improved ? h * 2.0 : h * 0.5;
  }
  if (out.value >= out.upper - 1e-12 * (1.0 + std::abs(out.upper))) {
    out.value = out.upper;
    out.status = FitzStatus::exact;
  }
  return out;
}

FitzEvaluation shift_phi(FitzEvaluation in, const Vec& dx, const Vec& dxs, const Vec& x, const Vec& xstar) {
  const double off = dx.dot(xstar) + x.dot(dxs) + dx.dot(dxs);
  in.value -= off;
  in.upper -= off;
  if (in.witness) {
    in.witness->x -= dx;
    in.witness->xstar -= dxs;
  }
  return in;
}

}  // namespace

FitzEvaluation phi(const MonotoneOperator& S, const Vec& x, const Vec& xstar, const FitzOptions& opts) {
  S.pair().check(x, "x");
  S.pair().check(xstar, "x*");
  return std::visit(
      overloaded{
          [&](const FiniteGraph& g) {
            const auto [v, i] = detail::finite_phi(g.points, x, xstar);
            FitzEvaluation out = exact(v);
            out.witness = g.points[i];
            return out;
          },
          [&](const Linear& L) { return affine_phi(L.M, Vec::Zero(S.dim()), x, xstar); },
          [&](const Subdifferential& d) -> FitzEvaluation {
            if (auto t = std::get_if<Translate>(&d.f.node())) {
              // G(d g) = G(d inner) - (shift, tilt).
              const auto inner = MonotoneOperator::subdifferential(S.pair(), *t->inner);
              return shift_phi(phi(*inner, x + t->shift, xstar + t->tilt, opts), t->shift, t->tilt, x, xstar);
            }
            if (auto g = affine_gradient(d.f)) return affine_phi(g->Q, g->b, x, xstar);
            if (fy_exact(d.f)) return exact(fy_sum(d.f, x, xstar));
            const double fx = eval(d.f, x);
            const double upper = std::isfinite(fx) ? fx + conjugate(d.f, xstar).upper : kInf;
            return sampled_phi(S, x, xstar, opts, upper);
          },
          [&](const NormalCone& c) { return exact(fy_sum(ConvexFn::indicator(c.K), x, xstar)); },
          [&](const SupportSubdiff& c) { return exact(fy_sum(ConvexFn::support(c.Kt), x, xstar)); },
          [&](const Shift& sh) {
            return shift_phi(phi(*sh.inner, x + sh.dx, xstar + sh.dxstar, opts), sh.dx, sh.dxstar, x, xstar);
          },
          [&](const InverseOp& inv) {
            auto out = phi(*inv.inner, xstar, x, opts);
            if (out.witness) std::swap(out.witness->x, out.witness->xstar);
            return out;
          },
          [&](const auto&) { return sampled_phi(S, x, xstar, opts, kInf); },
      },
      S.node());
}

FitzEvaluation phi_conj(const MonotoneOperator& S, const Vec& ystar, const Vec& ystarstar, const FitzOptions& opts) {
  S.pair().check(ystar, "y*");
  S.pair().check(ystarstar, "y**");
  return std::visit(
      overloaded{
          [&](const FiniteGraph& g) { return detail::finite_phi_conj(g.points, ystar, ystarstar); },
          [&](const Linear& L) { return affine_phi_conj(L.M, Vec::Zero(S.dim()), ystar, ystarstar); },
          [&](const Subdifferential& d) -> FitzEvaluation {
            if (auto t = std::get_if<Translate>(&d.f.node())) {
              const auto inner = MonotoneOperator::subdifferential(S.pair(), *t->inner);
              return phi_conj(*MonotoneOperator::shift(inner, t->shift, t->tilt), ystar, ystarstar, opts);
            }
            if (auto g = affine_gradient(d.f)) return affine_phi_conj(g->Q, g->b, ystar, ystarstar);
            // f** = f for closed convex f.
            if (fy_exact(d.f)) return exact(fy_sum(d.f, ystarstar, ystar));
            const double fyy = eval(d.f, ystarstar);
            FitzEvaluation out;
            out.status = FitzStatus::lower_bound;
            out.value = std::isfinite(fyy) ? conjugate(d.f, ystar).lower + fyy : kInf;
            const auto sample = graph_sample(S, opts.budget, opts.seed);
            out.upper = detail::finite_phi_conj(sample.points, ystar, ystarstar).value;
            if (out.upper <= out.value + 1e-12 * (1.0 + std::abs(out.value))) out.status = FitzStatus::exact;
            return out;
          },
          [&](const NormalCone& c) { return exact(fy_sum(ConvexFn::indicator(c.K), ystarstar, ystar)); },
          [&](const SupportSubdiff& c) { return exact(fy_sum(ConvexFn::support(c.Kt), ystarstar, ystar)); },
          [&](const Shift& sh) {
            auto out = phi_conj(*sh.inner, ystar + sh.dxstar, ystarstar + sh.dx, opts);
            const double off = sh.dx.dot(ystar) + sh.dxstar.dot(ystarstar) + sh.dx.dot(sh.dxstar);
            out.value -= off;
            out.upper -= off;
            return out;
          },
          [&](const InverseOp& inv) { return phi_conj(*inv.inner, ystarstar, ystar, opts); },
          [&](const auto&) -> FitzEvaluation {
            throw std::invalid_argument("phi_conj: no exact path for " + S.describe());
          },
      },
      S.node());
}

FitzEvaluation theta(const MonotoneOperator& S, const Vec& wstar, const Vec& wstarstar, const FitzOptions& opts) {
  return phi(S, wstarstar, wstar, opts);
}

FitzEvaluation theta_conj(const MonotoneOperator& S, const Vec& wstarstar, const Vec& wstar,
                          const FitzOptions& opts) {
  return phi_conj(S, wstar, wstarstar, opts);
}

FitzVerdict fitz_membership(const MonotoneOperator& S, const Vec& ystar, const Vec& ystarstar, double tol,
                            const FitzOptions& opts) {
  if (!(tol > 0)) throw std::invalid_argument("fitz_membership: tol must be positive");
  const auto th = theta(S, ystar, ystarstar, opts);
  FitzVerdict v;
  v.theta = th.value;
  v.theta_upper = th.upper;
  v.pairing = ystar.dot(ystarstar);
  v.status = th.status;
  const double bar = v.pairing + tol;
  if (th.value > bar) {
    v.verdict = Tri::no;
  } else if (th.status == FitzStatus::exact || th.upper <= bar) {
    v.verdict = Tri::yes;
  } else {
    v.verdict = Tri::unknown;
  }
  return v;
}

}  // namespace monolab

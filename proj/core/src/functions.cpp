#include "monolab/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "monolab/detail/overloaded.hpp"

namespace monolab {

namespace {

using detail::overloaded;

void check_len(const ConvexFn& f, const Vec& x, const char* what) {
  if (x.size() != f.dim()) {
    throw DimensionError(std::string(what) + " has length " + std::to_string(x.size()) + ", function expects " +
                         std::to_string(f.dim()));
  }
}

double eig_floor(const Quadratic& q) {
  const double m = q.eig->values.size() ? q.eig->values.cwiseAbs().maxCoeff() : 0.0;
  return 1e-12 * std::max(1.0, m);
}

bool smooth_quadratic_leaf(const ConvexFn& f) {
  if (std::holds_alternative<Quadratic>(f.node()) || std::holds_alternative<Affine>(f.node())) return true;
  if (const auto* h = std::get_if<HalfSqNorm>(&f.node())) return h->norm == NormTag::L2 || h->dim == 1;
  return false;
}

// Sum of the quadratic-like leaves as one 1/2 x'Qx + b'x + c.
struct QuadPart {
  Mat Q;
  Vec b;
  double c = 0.0;
  bool any = false;
};

void split_leaves(const std::vector<ConvexFn>& leaves, int n, QuadPart& qp, std::vector<ConvexFn>& others) {
  qp.Q = Mat::Zero(n, n);
  qp.b = Vec::Zero(n);
  for (const auto& l : leaves) {
    if (!smooth_quadratic_leaf(l)) {
      others.push_back(l);
      continue;
    }
    qp.any = true;
    std::visit(overloaded{
                   [&](const Quadratic& q) {
                     qp.Q += q.Q;
                     qp.b += q.b;
                     qp.c += q.c;
                   },
                   [&](const Affine& a) {
                     qp.b += a.a;
                     qp.c += a.c;
                   },
                   [&](const HalfSqNorm&) { qp.Q += Mat::Identity(n, n); },
                   [](const auto&) {},
               },
               l.node());
  }
}

// q when Q == q I.
std::optional<double> isotropic(const Mat& Q) {
  const double q = Q(0, 0);
  const double tol = 1e-14 * std::max(1.0, std::abs(q));
  if ((Q - q * Mat::Identity(Q.rows(), Q.cols())).cwiseAbs().maxCoeff() <= tol) return q;
  return std::nullopt;
}

Vec soft_threshold(const Vec& z, double lam) {
  Vec s(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]) - lam;
    s[i] = a > 0 ? std::copysign(a, z[i]) : 0.0;
  }
  return s;
}

// argmin t/2 ||s||_1^2 + 1/2 ||s - z||^2.
Vec prox_half_sq_l1(const Vec& z, double t) {
  std::vector<double> u(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) u[i] = std::abs(z[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double tk = cum / (1.0 + t * static_cast<double>(k + 1));
    if (u[k] > t * tk) tau = tk;
  }
  return soft_threshold(z, t * tau);
}

// argmin t/2 ||s||_inf^2 + 1/2 ||s - z||^2, by Moreau against 1/2 ||.||_1^2.
Vec prox_half_sq_linf(const Vec& z, double t) { return z - t * prox_half_sq_l1(z / t, 1.0 / t); }

ConjugateValue exact_conj(double v, std::optional<Vec> argmax = std::nullopt) {
  ConjugateValue cv;
  cv.value = cv.lower = cv.upper = v;
  cv.status = ConjStatus::exact;
  cv.argmax = std::move(argmax);
  return cv;
}

ConjugateValue unbounded_conj(Vec dir) {
  ConjugateValue cv;
  cv.value = cv.lower = cv.upper = kInf;
  cv.status = ConjStatus::unbounded;
  const double n = dir.norm();
  if (n > 0) dir /= n;
  cv.direction = std::move(dir);
  return cv;
}

void shift_conj(ConjugateValue& cv, double delta) {
  if (cv.status == ConjStatus::unbounded) return;
  cv.value += delta;
  cv.lower += delta;
  cv.upper += delta;
}

ProxResult single_prox(const Vec& z, double t, Vec s) {
  ProxResult r;
  r.parts.push_back((z - s) / t);
  r.point = std::move(s);
  return r;
}

ConjugateValue numeric_sum_conj(const ConvexFn& f, const std::vector<ConvexFn>& terms_in, const Vec& y) {
  const int n = f.dim();
  std::vector<ConvexFn> terms = terms_in;
  terms.push_back(ConvexFn::affine(-y, 0.0));
  const auto res = detail::minimize_sum(terms, 0.0, Vec::Zero(n));
  if (res.diverged) return unbounded_conj(res.x);

  ConjugateValue cv;
  cv.status = ConjStatus::bounded;
  cv.lower = -kInf;
  std::vector<Vec> cands = res.points;
  cands.push_back(res.x);
  for (const auto& p : cands) {
    const double fp = eval(f, p);
    if (!std::isfinite(fp)) continue;
    const double v = p.dot(y) - fp;
    if (v > cv.lower) {
      cv.lower = v;
      cv.argmax = p;
    }
  }

  const std::size_t m = terms.size() - 1;
  Vec r = y;
  for (std::size_t i = 0; i < m; ++i) r -= res.subgrads[i];
  cv.upper = kInf;
  for (std::size_t k = 0; k < m; ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i < m && std::isfinite(total); ++i) {
      const Vec yi = i == k ? Vec(res.subgrads[i] + r) : res.subgrads[i];
      total += conjugate(terms[i], yi).upper;
    }
    cv.upper = std::min(cv.upper, total);
  }
  cv.upper = std::max(cv.upper, cv.lower);
  cv.value = cv.lower;
  if (std::isfinite(cv.lower) && cv.upper - cv.lower <= 1e-10 * (1.0 + std::abs(cv.lower))) {
    cv.status = ConjStatus::exact;
  }
  return cv;
}

}  // namespace

// ---------------------------------------------------------------- factories

ConvexFn ConvexFn::quadratic(Mat Q, Vec b, double c) {
  const auto n = b.size();
  if (n < 1 || Q.rows() != n || Q.cols() != n) throw DimensionError("quadratic: Q must be n x n with b of length n");
  if (!Q.allFinite() || !b.allFinite() || !std::isfinite(c)) throw std::invalid_argument("quadratic: non-finite data");
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("quadratic: Q is not symmetric");
  }
  Mat S = 0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) throw std::invalid_argument("quadratic: Q is not positive semidefinite");
  auto eig = std::make_shared<Quadratic::Eig>();
  eig->vectors = es.eigenvectors();
  eig->values = es.eigenvalues().cwiseMax(0.0);
  return ConvexFn(Quadratic{std::move(S), std::move(b), c, std::move(eig)}, static_cast<int>(n));
}

ConvexFn ConvexFn::norm(int dim, double scale, NormTag norm) {
  if (dim < 1) throw std::invalid_argument("norm: dimension must be positive");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw std::invalid_argument("norm: scale must be finite and >= 0");
  return ConvexFn(NormFn{dim, scale, norm}, dim);
}

ConvexFn ConvexFn::support(CompactConvexSet set) {
  const int n = set.dim();
  return ConvexFn(SupportFn{std::move(set)}, n);
}

ConvexFn ConvexFn::indicator(CompactConvexSet set) {
  const int n = set.dim();
  return ConvexFn(IndicatorFn{std::move(set)}, n);
}

ConvexFn ConvexFn::affine(Vec a, double c) {
  if (a.size() < 1) throw std::invalid_argument("affine: empty slope");
  if (!a.allFinite() || !std::isfinite(c)) throw std::invalid_argument("affine: non-finite data");
  const int n = static_cast<int>(a.size());
  return ConvexFn(Affine{std::move(a), c}, n);
}

ConvexFn ConvexFn::zero(int dim) { return affine(Vec::Zero(dim), 0.0); }

ConvexFn ConvexFn::half_sq_norm(int dim, NormTag norm) {
  if (dim < 1) throw std::invalid_argument("half_sq_norm: dimension must be positive");
  return ConvexFn(HalfSqNorm{dim, norm}, dim);
}

ConvexFn ConvexFn::translate(ConvexFn inner, Vec shift, Vec tilt) {
  if (shift.size() != inner.dim() || tilt.size() != inner.dim()) throw DimensionError("translate: length mismatch");
  const int n = inner.dim();
  return ConvexFn(Translate{std::make_shared<const ConvexFn>(std::move(inner)), std::move(shift), std::move(tilt)}, n);
}

ConvexFn ConvexFn::sum(ConvexFn f, ConvexFn g) {
  if (f.dim() != g.dim()) throw DimensionError("sum: summands have different dimensions");
  const int n = f.dim();
  return ConvexFn(SumFn{std::make_shared<const ConvexFn>(std::move(f)), std::make_shared<const ConvexFn>(std::move(g))},
                  n);
}

std::string ConvexFn::describe() const {
  return std::visit(overloaded{
                        [](const Quadratic&) -> std::string { return "quadratic"; },
                        [](const NormFn& f) { return "norm_" + std::string(to_string(f.norm)); },
                        [](const SupportFn&) -> std::string { return "support"; },
                        [](const IndicatorFn&) -> std::string { return "indicator"; },
                        [](const Affine&) -> std::string { return "affine"; },
                        [](const HalfSqNorm& h) { return "half_sq_norm_" + std::string(to_string(h.norm)); },
                        [](const Translate& t) { return "translate(" + t.inner->describe() + ")"; },
                        [](const SumFn& s) { return "sum(" + s.f->describe() + "," + s.g->describe() + ")"; },
                    },
                    node_);
}

// ---------------------------------------------------------------- eval

double eval(const ConvexFn& f, const Vec& x) {
  check_len(f, x, "eval argument");
  return std::visit(overloaded{
                        [&](const Quadratic& q) { return 0.5 * x.dot(q.Q * x) + q.b.dot(x) + q.c; },
                        [&](const NormFn& g) { return g.scale * norm_value(g.norm, x); },
                        [&](const SupportFn& g) { return support(g.set, x); },
                        [&](const IndicatorFn& g) { return contains(g.set, x, kDomainTol) ? 0.0 : kInf; },
                        [&](const Affine& a) { return a.a.dot(x) + a.c; },
                        [&](const HalfSqNorm& h) {
                          const double v = norm_value(h.norm, x);
                          return 0.5 * v * v;
                        },
                        [&](const Translate& t) {
                          const double v = eval(*t.inner, x + t.shift);
                          return std::isfinite(v) ? v - x.dot(t.tilt) : kInf;
                        },
                        [&](const SumFn& s) {
                          const double a = eval(*s.f, x);
                          if (!std::isfinite(a)) return kInf;
                          const double b = eval(*s.g, x);
                          return std::isfinite(b) ? a + b : kInf;
                        },
                    },
                    f.node());
}

bool in_domain(const ConvexFn& f, const Vec& x) { return std::isfinite(eval(f, x)); }

// ---------------------------------------------------------------- conjugate

ConjugateValue conjugate(const ConvexFn& f, const Vec& y) {
  check_len(f, y, "conjugate argument");
  return std::visit(
      overloaded{
          [&](const Quadratic& q) -> ConjugateValue {
            const Vec r = y - q.b;
            const Vec rt = q.eig->vectors.transpose() * r;
            const double floor = eig_floor(q);
            const double rtol = 1e-9 * (1.0 + r.norm());
            double acc = 0.0;
            Vec xt = Vec::Zero(rt.size());
            for (Eigen::Index i = 0; i < rt.size(); ++i) {
              const double lam = q.eig->values[i];
              if (lam > floor) {
                acc += rt[i] * rt[i] / lam;
                xt[i] = rt[i] / lam;
              } else if (std::abs(rt[i]) > rtol) {
                return unbounded_conj(q.eig->vectors.col(i) * (rt[i] > 0 ? 1.0 : -1.0));
              }
            }
            return exact_conj(0.5 * acc - q.c, Vec(q.eig->vectors * xt));
          },
          [&](const NormFn& g) -> ConjugateValue {
            const double d = norm_value(dual(g.norm), y);
            if (d <= g.scale + 1e-9 * (1.0 + g.scale)) return exact_conj(0.0, Vec::Zero(y.size()));
            return unbounded_conj(norm_subgradient(dual(g.norm), y));
          },
          [&](const SupportFn& g) -> ConjugateValue {
            if (contains(g.set, y, kDomainTol)) return exact_conj(0.0, Vec::Zero(y.size()));
            return unbounded_conj(y - project(g.set, y));
          },
          [&](const IndicatorFn& g) { return exact_conj(support(g.set, y), argmax_support(g.set, y)); },
          [&](const Affine& a) -> ConjugateValue {
            if ((y - a.a).lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + a.a.lpNorm<Eigen::Infinity>())) {
              return exact_conj(-a.c, Vec::Zero(y.size()));
            }
            return unbounded_conj(y - a.a);
          },
          [&](const HalfSqNorm& h) {
            const double d = norm_value(dual(h.norm), y);
            return exact_conj(0.5 * d * d, Vec(d * norm_subgradient(dual(h.norm), y)));
          },
          [&](const Translate& t) {
            const Vec yt = y + t.tilt;
            ConjugateValue cv = conjugate(*t.inner, yt);
            shift_conj(cv, -t.shift.dot(yt));
            if (cv.argmax) *cv.argmax -= t.shift;
            return cv;
          },
          [&](const SumFn&) -> ConjugateValue {
            QuadPart qp;
            std::vector<ConvexFn> others;
            split_leaves(flatten(f), f.dim(), qp, others);
            if (others.empty()) return conjugate(ConvexFn::quadratic(qp.Q, qp.b, qp.c), y);
            if (others.size() == 1) {
              const ConvexFn& g = others.front();
              if (qp.Q.cwiseAbs().maxCoeff() == 0.0) {
                ConjugateValue cv = conjugate(g, y - qp.b);
                shift_conj(cv, -qp.c);
                return cv;
              }
              if (auto q = isotropic(qp.Q); q && *q > 0) {
                // sup <x,y> - g(x) - q/2|x|^2 - <b,x> - c is attained at a prox point.
                const double tp = 1.0 / *q;
                const Vec zp = (y - qp.b) * tp;
                const ProxResult pr = prox(g, zp, tp);
                const double fx = eval(f, pr.point);
                if (std::isfinite(fx)) {
                  const double v = pr.point.dot(y) - fx;
                  if (pr.exact) return exact_conj(v, pr.point);
                  ConjugateValue cv;
                  cv.status = ConjStatus::bounded;
                  cv.value = cv.lower = v;
                  const Vec gv = (zp - pr.point) / tp;
                  const Vec rest = y - gv - qp.b;
                  cv.upper = std::max(v, conjugate(g, gv).upper + 0.5 * rest.squaredNorm() / *q - qp.c);
                  cv.argmax = pr.point;
                  return cv;
                }
              }
            }
            std::vector<ConvexFn> terms = others;
            if (qp.any) terms.push_back(ConvexFn::quadratic(qp.Q, qp.b, qp.c));
            return numeric_sum_conj(f, terms, y);
          },
      },
      f.node());
}

// ---------------------------------------------------------------- subdifferential

Tri subdiff_contains(const ConvexFn& f, const Vec& x, const Vec& xstar, double tol) {
  check_len(f, x, "x");
  check_len(f, xstar, "x*");
  if (!(tol > 0)) throw std::invalid_argument("subdiff_contains: tol must be positive");
  if (const auto* t = std::get_if<Translate>(&f.node())) {
    return subdiff_contains(*t->inner, x + t->shift, xstar + t->tilt, tol);
  }
  if (std::holds_alternative<SumFn>(f.node())) {
    // Peel off summands that are differentiable everywhere.
    Vec rest = xstar;
    std::vector<ConvexFn> nonsmooth;
    for (const auto& l : flatten(f)) {
      if (auto g = gradient(l, x)) {
        rest -= *g;
      } else {
        nonsmooth.push_back(l);
      }
    }
    if (nonsmooth.size() == 1) return subdiff_contains(nonsmooth.front(), x, rest, tol);
    if (nonsmooth.empty()) return (rest.lpNorm<Eigen::Infinity>() <= tol) ? Tri::yes : Tri::no;
  }
  const double fx = eval(f, x);
  if (!std::isfinite(fx)) return Tri::no;
  const ConjugateValue cv = conjugate(f, xstar);
  const double pair = x.dot(xstar);
  if (cv.upper + fx <= pair + tol) return Tri::yes;
  if (cv.lower + fx > pair + tol) return Tri::no;
  return Tri::unknown;
}

// ---------------------------------------------------------------- prox

ProxResult prox(const ConvexFn& f, const Vec& z, double t) {
  check_len(f, z, "prox argument");
  if (!(t > 0) || !std::isfinite(t)) throw std::invalid_argument("prox: step must be positive and finite");
  return std::visit(
      overloaded{
          [&](const Quadratic& q) {
            const Vec w = q.eig->vectors.transpose() * (z - t * q.b);
            const Vec d = (1.0 + t * q.eig->values.array()).inverse().matrix();
            return single_prox(z, t, q.eig->vectors * d.asDiagonal() * w);
          },
          [&](const NormFn& g) -> ProxResult {
            const double lam = t * g.scale;
            switch (g.norm) {
              case NormTag::L2: {
                const double nz = z.norm();
                if (nz <= lam) return single_prox(z, t, Vec::Zero(z.size()));
                return single_prox(z, t, (1.0 - lam / nz) * z);
              }
              case NormTag::L1: return single_prox(z, t, soft_threshold(z, lam));
              case NormTag::LInf: return single_prox(z, t, z - detail::project_l1_ball(z, lam));
            }
            return single_prox(z, t, z);
          },
          [&](const SupportFn& g) { return single_prox(z, t, z - t * project(g.set, z / t)); },
          [&](const IndicatorFn& g) { return single_prox(z, t, project(g.set, z)); },
          [&](const Affine& a) { return single_prox(z, t, z - t * a.a); },
          [&](const HalfSqNorm& h) -> ProxResult {
            if (h.norm == NormTag::L2 || h.dim == 1) return single_prox(z, t, z / (1.0 + t));
            if (h.norm == NormTag::L1) return single_prox(z, t, prox_half_sq_l1(z, t));
            return single_prox(z, t, prox_half_sq_linf(z, t));
          },
          [&](const Translate& tr) {
            const ProxResult inner = prox(*tr.inner, z + tr.shift + t * tr.tilt, t);
            ProxResult r = single_prox(z, t, inner.point - tr.shift);
            r.exact = inner.exact;
            r.converged = inner.converged;
            r.residual = inner.residual;
            r.iterations = inner.iterations;
            return r;
          },
          [&](const SumFn&) -> ProxResult {
            const int n = f.dim();
            const auto leaves = flatten(f);
            QuadPart qp;
            std::vector<ConvexFn> others;
            split_leaves(leaves, n, qp, others);

            ProxResult r;
            std::vector<Vec> other_parts;
            if (others.empty()) {
              const Mat A = Mat::Identity(n, n) + t * qp.Q;
              r.point = A.ldlt().solve(z - t * qp.b);
            } else if (auto q = isotropic(qp.Q); others.size() == 1 && q) {
              const double tp = t / (1.0 + t * *q);
              const Vec zp = (z - t * qp.b) / (1.0 + t * *q);
              const ProxResult inner = prox(others.front(), zp, tp);
              r.point = inner.point;
              r.exact = inner.exact;
              r.converged = inner.converged;
              r.iterations = inner.iterations;
              other_parts.push_back((zp - inner.point) / tp);
            } else {
              std::vector<ConvexFn> terms = others;
              if (qp.any) terms.push_back(ConvexFn::quadratic(qp.Q, qp.b, qp.c));
              const auto res = detail::minimize_sum(terms, 1.0 / t, z);
              r.point = res.x;
              r.exact = false;
              r.converged = res.converged;
              r.iterations = res.iterations;
              for (std::size_t i = 0; i < others.size(); ++i) other_parts.push_back(res.subgrads[i]);
            }
            std::size_t k = 0;
            Vec total = Vec::Zero(n);
            for (const auto& l : leaves) {
              if (smooth_quadratic_leaf(l)) {
                r.parts.push_back(*gradient(l, r.point));
              } else {
                r.parts.push_back(other_parts[k++]);
              }
              total += r.parts.back();
            }
            r.residual = std::max(r.residual, (total - (z - r.point) / t).norm());
            return r;
          },
      },
      f.node());
}

std::vector<ConvexFn> flatten(const ConvexFn& f) {
  std::vector<ConvexFn> out;
  if (const auto* s = std::get_if<SumFn>(&f.node())) {
    for (const auto& part : {s->f, s->g}) {
      auto sub = flatten(*part);
      out.insert(out.end(), sub.begin(), sub.end());
    }
  } else {
    out.push_back(f);
  }
  return out;
}

bool is_smooth(const ConvexFn& f) {
  if (smooth_quadratic_leaf(f)) return true;
  if (const auto* t = std::get_if<Translate>(&f.node())) return is_smooth(*t->inner);
  if (const auto* s = std::get_if<SumFn>(&f.node())) return is_smooth(*s->f) && is_smooth(*s->g);
  return false;
}

std::optional<Vec> gradient(const ConvexFn& f, const Vec& x) {
  check_len(f, x, "gradient argument");
  if (!is_smooth(f)) return std::nullopt;
  return std::visit(overloaded{
                        [&](const Quadratic& q) -> std::optional<Vec> { return Vec(q.Q * x + q.b); },
                        [&](const Affine& a) -> std::optional<Vec> { return a.a; },
                        [&](const HalfSqNorm&) -> std::optional<Vec> { return x; },
                        [&](const Translate& t) -> std::optional<Vec> {
                          return Vec(*gradient(*t.inner, x + t.shift) - t.tilt);
                        },
                        [&](const SumFn& s) -> std::optional<Vec> {
                          return Vec(*gradient(*s.f, x) + *gradient(*s.g, x));
                        },
                        [](const auto&) -> std::optional<Vec> { return std::nullopt; },
                    },
                    f.node());
}

Minorant minorant(const ConvexFn& f, NormTag norm) {
  const ProxResult r = prox(f, Vec::Zero(f.dim()), 1.0);
  const Vec xs = -r.point;
  Minorant m;
  m.gamma0 = norm_value(dual(norm), xs);
  const double fs = eval(f, r.point);
  m.exact = r.exact && std::isfinite(fs);
  if (!std::isfinite(fs)) throw std::runtime_error("minorant: prox point left the domain");
  m.delta0 = std::max(0.0, r.point.dot(xs) - fs);
  if (!r.exact) m.delta0 += 1e-8 * (1.0 + m.delta0);
  return m;
}

InfBound inf_bound(const ConvexFn& f) {
  const ConjugateValue cv = conjugate(f, Vec::Zero(f.dim()));
  InfBound b;
  if (cv.status == ConjStatus::unbounded) {
    b.lower = b.upper = -kInf;
    b.certified = true;
    if (cv.direction) b.argmin = *cv.direction;
    return b;
  }
  b.argmin = cv.argmax ? *cv.argmax : domain_point(f);
  b.upper = std::min(-cv.lower, eval(f, b.argmin));
  b.certified = std::isfinite(cv.upper);
  b.lower = b.certified ? std::min(-cv.upper, b.upper) : b.upper;
  return b;
}

std::optional<ConvexFn> conjugate_fn(const ConvexFn& f) {
  const int n = f.dim();
  return std::visit(
      overloaded{
          [&](const Quadratic& q) -> std::optional<ConvexFn> {
            const double top = q.eig->values.maxCoeff();
            if (top == 0.0) {
              auto ind = ConvexFn::indicator(CompactConvexSet::singleton(q.b, Side::dual));
              if (q.c == 0.0) return ind;
              return ConvexFn::sum(ind, ConvexFn::affine(Vec::Zero(n), -q.c));
            }
            if (q.eig->values.minCoeff() <= 1e-12 * std::max(1.0, top)) return std::nullopt;
            const Mat& V = q.eig->vectors;
            const Mat Qi = V * q.eig->values.cwiseInverse().asDiagonal() * V.transpose();
            const Vec qb = Qi * q.b;
            return ConvexFn::quadratic(0.5 * (Qi + Qi.transpose()), -qb, 0.5 * q.b.dot(qb) - q.c);
          },
          [&](const NormFn& g) -> std::optional<ConvexFn> {
            return ConvexFn::indicator(CompactConvexSet::ball(Vec::Zero(n), g.scale, dual(g.norm), Side::dual));
          },
          [&](const SupportFn& g) -> std::optional<ConvexFn> { return ConvexFn::indicator(g.set.on_side(Side::dual)); },
          [&](const IndicatorFn& g) -> std::optional<ConvexFn> { return ConvexFn::support(g.set.on_side(Side::dual)); },
          [&](const Affine& a) -> std::optional<ConvexFn> {
            auto ind = ConvexFn::indicator(CompactConvexSet::singleton(a.a, Side::dual));
            if (a.c == 0.0) return ind;
            return ConvexFn::sum(ind, ConvexFn::affine(Vec::Zero(n), -a.c));
          },
          [&](const HalfSqNorm& h) -> std::optional<ConvexFn> { return ConvexFn::half_sq_norm(n, dual(h.norm)); },
          [&](const Translate& t) -> std::optional<ConvexFn> {
            auto inner = conjugate_fn(*t.inner);
            if (!inner) return std::nullopt;
            auto g = ConvexFn::translate(std::move(*inner), t.tilt, t.shift);
            const double k = t.shift.dot(t.tilt);
            if (k == 0.0) return g;
            return ConvexFn::sum(std::move(g), ConvexFn::affine(Vec::Zero(n), -k));
          },
          [&](const SumFn&) -> std::optional<ConvexFn> {
            QuadPart qp;
            std::vector<ConvexFn> others;
            split_leaves(flatten(f), n, qp, others);
            if (others.size() != 1 || qp.Q.cwiseAbs().maxCoeff() != 0.0) return std::nullopt;
            auto inner = conjugate_fn(others.front());
            if (!inner) return std::nullopt;
            auto g = ConvexFn::translate(std::move(*inner), -qp.b, Vec::Zero(n));
            if (qp.c == 0.0) return g;
            return ConvexFn::sum(std::move(g), ConvexFn::affine(Vec::Zero(n), -qp.c));
          },
      },
      f.node());
}

Vec domain_point(const ConvexFn& f) { return prox(f, Vec::Zero(f.dim()), 1.0).point; }

// ---------------------------------------------------------------- splitting

namespace detail {

SplitResult minimize_sum(const std::vector<ConvexFn>& terms, double rho, const Vec& center, const SplitOptions& opts) {
  SplitResult out;
  const auto m = terms.size();
  const auto n = center.size();
  if (m == 0) {
    out.x = rho > 0 ? center : Vec::Zero(n);
    out.converged = true;
    return out;
  }
  const double md = static_cast<double>(m);
  const double gi = 1.0 / (rho / md + 1.0 / opts.gamma);
  const Vec shift = (rho / md) * center;

  std::vector<Vec> z(m, center);
  std::vector<Vec> p(m, center);
  std::vector<Vec> w(m);
  Vec x = center;
  for (int k = 0; k < opts.max_iter; ++k) {
    Vec xn = Vec::Zero(n);
    for (const auto& zi : z) xn += zi;
    xn /= md;
    double spread = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      w[i] = gi * (shift + (2.0 * xn - z[i]) / opts.gamma);
      p[i] = prox(terms[i], w[i], gi).point;
      z[i] += p[i] - xn;
      spread = std::max(spread, (p[i] - xn).norm());
    }
    const double step = (xn - x).norm();
    x = xn;
    out.iterations = k + 1;
    // Rounding floor: the splitting variables can be far larger than x.
    double zmax = 0.0;
    for (const auto& zi : z) zmax = std::max(zmax, zi.norm());
    const double scale = 1.0 + x.norm() + 64.0 * std::numeric_limits<double>::epsilon() * zmax / opts.tol;
    out.residual = std::max(spread, step);
    if (!x.allFinite() || x.norm() > 1e8) {
      out.diverged = true;
      break;
    }
    if (spread <= opts.tol * scale && step <= opts.tol * scale) {
      out.converged = true;
      break;
    }
  }
  out.points = p;
  out.subgrads.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.subgrads[i] = (w[i] - p[i]) / gi;
  Vec mean = Vec::Zero(n);
  for (const auto& pi : p) mean += pi;
  out.x = out.diverged ? x : Vec(mean / md);
  return out;
}

}  // namespace detail

}  // namespace monolab

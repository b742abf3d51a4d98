#include "monolab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "monolab/detail/overloaded.hpp"
#include "monolab/rng.hpp"

namespace monolab {

namespace {

using detail::overloaded;

void check_pair_len(const DualPair& p, const Vec& v, const char* what) { p.check(v, what); }

ResolventPoint from_prox(const Vec& z, double lambda, const ProxResult& r) {
  ResolventPoint out;
  out.point = {r.point, (z - r.point) / lambda};
  out.exact = r.exact;
  out.converged = r.converged;
  out.residual = r.residual;
  return out;
}

std::optional<ResolventPoint> sum_resolvent(const MonotoneOperator& S, const MonotoneOperator& T, const Vec& z,
                                            double lambda) {
  // Douglas-Rachford on A = S + (I - z)/(2 lambda), B = T + (I - z)/(2 lambda).
  const double gamma = lambda;
  const double c = 1.0 + gamma / (2.0 * lambda);
  const double mu = gamma / c;
  auto J = [&](const MonotoneOperator& op, const Vec& v) { return resolvent(op, (v + gamma * z / (2.0 * lambda)) / c, mu); };

  Vec y = z;
  double res = kInf, inner = 0.0;
  Vec xa, xb;
  bool converged = false;
  for (int k = 0; k < 5000; ++k) {
    const auto ra = J(S, y);
    if (!ra) return std::nullopt;
    xa = ra->point.x;
    const auto rb = J(T, 2.0 * xa - y);
    if (!rb) return std::nullopt;
    xb = rb->point.x;
    y += xb - xa;
    res = (xa - xb).norm();
    inner = std::max(ra->residual, rb->residual);
    if (!y.allFinite()) return std::nullopt;
    if (res <= 1e-13 * (1.0 + xa.norm())) {
      converged = true;
      break;
    }
  }
  ResolventPoint out;
  const Vec s = 0.5 * (xa + xb);
  out.point = {s, (z - s) / lambda};
  out.residual = std::max(res, inner);
  out.exact = false;
  out.converged = converged;
  return out;
}

}  // namespace

// ---------------------------------------------------------------- factories

OperatorPtr MonotoneOperator::finite_graph(const DualPair& pair, std::vector<PairedPoint> points) {
  if (points.empty()) throw std::invalid_argument("finite graph must have at least one point");
  for (const auto& p : points) {
    check_pair_len(pair, p.x, "graph point x");
    check_pair_len(pair, p.xstar, "graph point x*");
  }
  return std::make_shared<const MonotoneOperator>(FiniteGraph{std::move(points)}, pair);
}

OperatorPtr MonotoneOperator::linear(const DualPair& pair, Mat M) {
  if (M.rows() != pair.dim() || M.cols() != pair.dim()) throw DimensionError("linear operator matrix must be n x n");
  if (!M.allFinite()) throw std::invalid_argument("linear operator matrix is not finite");
  return std::make_shared<const MonotoneOperator>(Linear{std::move(M)}, pair);
}

OperatorPtr MonotoneOperator::subdifferential(const DualPair& pair, ConvexFn f) {
  if (f.dim() != pair.dim()) throw DimensionError("subdifferential: function dimension differs from the pair");
  return std::make_shared<const MonotoneOperator>(Subdifferential{std::move(f)}, pair);
}

OperatorPtr MonotoneOperator::normal_cone(const DualPair& pair, CompactConvexSet K) {
  if (K.dim() != pair.dim()) throw DimensionError("normal cone: set dimension differs from the pair");
  return std::make_shared<const MonotoneOperator>(NormalCone{K.on_side(Side::primal)}, pair);
}

OperatorPtr MonotoneOperator::support_subdiff(const DualPair& pair, CompactConvexSet Kt) {
  if (Kt.dim() != pair.dim()) throw DimensionError("support subdifferential: set dimension differs from the pair");
  return std::make_shared<const MonotoneOperator>(SupportSubdiff{Kt.on_side(Side::dual)}, pair);
}

OperatorPtr MonotoneOperator::shift(OperatorPtr inner, Vec dx, Vec dxstar) {
  check_pair_len(inner->pair(), dx, "shift dx");
  check_pair_len(inner->pair(), dxstar, "shift dx*");
  const DualPair p = inner->pair();
  return std::make_shared<const MonotoneOperator>(Shift{std::move(inner), std::move(dx), std::move(dxstar)}, p);
}

OperatorPtr MonotoneOperator::sum(OperatorPtr S, OperatorPtr T) {
  if (!(S->pair() == T->pair())) throw std::invalid_argument("sum: operands live on different pairs");
  const DualPair p = S->pair();
  return std::make_shared<const MonotoneOperator>(SumOp{std::move(S), std::move(T)}, p);
}

OperatorPtr MonotoneOperator::inverse(OperatorPtr inner) {
  const DualPair p = inner->pair().swapped();
  return std::make_shared<const MonotoneOperator>(InverseOp{std::move(inner)}, p);
}

OperatorPtr MonotoneOperator::parallel_sum(OperatorPtr S, OperatorPtr T) {
  if (!(S->pair() == T->pair())) throw std::invalid_argument("parallel sum: operands live on different pairs");
  auto eq = inverse(sum(inverse(S), inverse(T)));
  const DualPair p = S->pair();
  return std::make_shared<const MonotoneOperator>(ParallelSum{std::move(S), std::move(T), std::move(eq)}, p);
}

std::string MonotoneOperator::describe() const {
  return std::visit(overloaded{
                        [](const FiniteGraph& g) { return "graph[" + std::to_string(g.points.size()) + "]"; },
                        [](const Linear&) -> std::string { return "linear"; },
                        [](const Subdifferential& s) { return "subdiff(" + s.f.describe() + ")"; },
                        [](const NormalCone&) -> std::string { return "normal_cone"; },
                        [](const SupportSubdiff&) -> std::string { return "support_subdiff"; },
                        [](const Shift& s) { return "shift(" + s.inner->describe() + ")"; },
                        [](const SumOp& s) { return "sum(" + s.S->describe() + "," + s.T->describe() + ")"; },
                        [](const InverseOp& s) { return "inverse(" + s.inner->describe() + ")"; },
                        [](const ParallelSum& s) {
                          return "parallel_sum(" + s.S->describe() + "," + s.T->describe() + ")";
                        },
                    },
                    node_);
}

OperatorPtr tail_operator(int n, NormTag primal) {
  if (n < 1) throw std::invalid_argument("tail operator needs n >= 1");
  Mat M = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) M(i, j) = 1.0;
  return MonotoneOperator::linear(DualPair(n, primal), std::move(M));
}

// ---------------------------------------------------------------- resolvent

std::optional<ResolventPoint> resolvent(const MonotoneOperator& S, const Vec& z, double lambda) {
  check_pair_len(S.pair(), z, "resolvent argument");
  if (!(lambda > 0) || !std::isfinite(lambda)) throw std::invalid_argument("resolvent: lambda must be positive");
  return std::visit(
      overloaded{
          [&](const FiniteGraph& g) -> std::optional<ResolventPoint> {
            ResolventPoint best;
            best.residual = kInf;
            for (const auto& p : g.points) {
              const double r = (p.x + lambda * p.xstar - z).norm();
              if (r < best.residual) {
                best.residual = r;
                best.point = p;
              }
            }
            best.exact = best.residual == 0.0;
            return best;
          },
          [&](const Linear& L) -> std::optional<ResolventPoint> {
            const Mat A = Mat::Identity(S.dim(), S.dim()) + lambda * L.M;
            Eigen::FullPivLU<Mat> lu(A);
            if (!lu.isInvertible()) return std::nullopt;
            ResolventPoint out;
            const Vec s = lu.solve(z);
            out.point = {s, L.M * s};
            out.residual = (s + lambda * out.point.xstar - z).norm();
            return out;
          },
          [&](const Subdifferential& d) -> std::optional<ResolventPoint> {
            return from_prox(z, lambda, prox(d.f, z, lambda));
          },
          [&](const NormalCone& c) -> std::optional<ResolventPoint> {
            const Vec s = project(c.K, z);
            ResolventPoint out;
            out.point = {s, (z - s) / lambda};
            return out;
          },
          [&](const SupportSubdiff& c) -> std::optional<ResolventPoint> {
            const Vec s = z - lambda * project(c.Kt, z / lambda);
            ResolventPoint out;
            out.point = {s, (z - s) / lambda};
            return out;
          },
          [&](const Shift& sh) -> std::optional<ResolventPoint> {
            auto r = resolvent(*sh.inner, z + sh.dx + lambda * sh.dxstar, lambda);
            if (!r) return std::nullopt;
            r->point.x -= sh.dx;
            r->point.xstar -= sh.dxstar;
            return r;
          },
          [&](const SumOp& s) { return sum_resolvent(*s.S, *s.T, z, lambda); },
          [&](const InverseOp& inv) -> std::optional<ResolventPoint> {
            // s + lambda s* = z with (s*, s) in G(inner): s* + s/lambda = z/lambda.
            auto r = resolvent(*inv.inner, z / lambda, 1.0 / lambda);
            if (!r) return std::nullopt;
            std::swap(r->point.x, r->point.xstar);
            r->residual *= lambda;
            return r;
          },
          [&](const ParallelSum& p) { return resolvent(*p.equivalent, z, lambda); },
      },
      S.node());
}

// ---------------------------------------------------------------- sampling

GraphSample graph_sample_at(const MonotoneOperator& S, const std::vector<Vec>& zs) {
  GraphSample out;
  for (const auto& z : zs) {
    const auto r = resolvent(S, z, 1.0);
    if (r && r->converged && r->residual <= 1e-6) {
      out.points.push_back(r->point);
    } else {
      ++out.failures;
    }
  }
  return out;
}

GraphSample graph_sample(const MonotoneOperator& S, int budget, std::uint64_t seed, const SampleOptions& opts) {
  if (budget < 1) throw std::invalid_argument("graph_sample: budget must be >= 1");
  const int n = S.dim();
  const double R = opts.radius;
  const Vec zc = opts.center ? *opts.center : Vec::Zero(n);
  check_pair_len(S.pair(), zc, "sample center");
  Rng rng(seed);

  auto z_cloud = [&](int count) {
    std::vector<Vec> zs;
    for (int k = 0; k < count; ++k) zs.push_back(k == 0 ? zc : Vec(zc + rng.uniform_vec(n, -2 * R, 2 * R)));
    return zs;
  };

  return std::visit(
      overloaded{
          [&](const FiniteGraph& g) {
            GraphSample out;
            out.points = g.points;
            return out;
          },
          [&](const Linear& L) {
            GraphSample out;
            Vec x0 = Vec::Zero(n);
            if (opts.center) {
              if (auto r = resolvent(S, zc)) x0 = r->point.x;
            }
            for (int k = 0; k < budget; ++k) {
              const Vec x = k == 0 ? x0 : Vec(x0 + rng.uniform_vec(n, -R, R));
              out.points.push_back({x, L.M * x});
            }
            return out;
          },
          [&](const NormalCone& c) {
            GraphSample out;
            const auto seeds = c.K.seed_points();
            const int extra = std::min<int>(static_cast<int>(seeds.size()), budget / 4);
            for (int k = 0; k < extra; ++k) out.points.push_back({seeds[k], Vec::Zero(n)});
            auto rest = graph_sample_at(S, z_cloud(budget - extra));
            out.points.insert(out.points.end(), rest.points.begin(), rest.points.end());
            out.failures = rest.failures;
            return out;
          },
          [&](const SupportSubdiff& c) {
            GraphSample out;
            const auto seeds = c.Kt.seed_points();
            const int extra = std::min<int>(static_cast<int>(seeds.size()), budget / 4);
            for (int k = 0; k < extra; ++k) out.points.push_back({Vec::Zero(n), seeds[k]});
            auto rest = graph_sample_at(S, z_cloud(budget - extra));
            out.points.insert(out.points.end(), rest.points.begin(), rest.points.end());
            out.failures = rest.failures;
            return out;
          },
          [&](const Shift& sh) {
            SampleOptions inner = opts;
            inner.center = zc + sh.dx + sh.dxstar;
            GraphSample out = graph_sample(*sh.inner, budget, seed, inner);
            for (auto& p : out.points) {
              p.x -= sh.dx;
              p.xstar -= sh.dxstar;
            }
            return out;
          },
          [&](const InverseOp& inv) {
            GraphSample out = graph_sample(*inv.inner, budget, seed, opts);
            for (auto& p : out.points) std::swap(p.x, p.xstar);
            return out;
          },
          [&](const auto&) { return graph_sample_at(S, z_cloud(budget)); },
      },
      S.node());
}

MonotoneVerdict monotone_check(const MonotoneOperator& S, int budget, std::uint64_t seed) {
  if (budget < 2) throw std::invalid_argument("monotone_check: budget must be >= 2");
  const auto sample = graph_sample(S, budget, seed);
  MonotoneVerdict v;
  v.samples = static_cast<int>(sample.points.size());
  const auto& pts = sample.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double q = (pts[i].x - pts[j].x).dot(pts[i].xstar - pts[j].xstar);
      if (q < v.min_pairing) {
        v.min_pairing = q;
        if (q < -1e-10) v.witness = std::make_pair(pts[i], pts[j]);
      }
    }
  }
  v.ok = !(v.min_pairing < -1e-10);
  if (v.ok) v.witness.reset();
  return v;
}

// ---------------------------------------------------------------- membership

double membership_residual(const MonotoneOperator& S, const Vec& x, const Vec& xstar) {
  const auto r = resolvent(S, x + xstar, 1.0);
  if (!r) return kInf;
  return std::max((r->point.x - x).norm(), std::isfinite(r->residual) ? 0.0 : kInf);
}

Tri contains(const MonotoneOperator& S, const Vec& x, const Vec& xstar, double tol) {
  check_pair_len(S.pair(), x, "x");
  check_pair_len(S.pair(), xstar, "x*");
  return std::visit(
      overloaded{
          [&](const FiniteGraph& g) {
            for (const auto& p : g.points) {
              if ((p.x - x).lpNorm<Eigen::Infinity>() <= tol && (p.xstar - xstar).lpNorm<Eigen::Infinity>() <= tol) {
                return Tri::yes;
              }
            }
            return Tri::no;
          },
          [&](const Linear& L) {
            const Vec y = L.M * x;
            return (y - xstar).lpNorm<Eigen::Infinity>() <= tol * (1.0 + y.lpNorm<Eigen::Infinity>()) ? Tri::yes
                                                                                                    : Tri::no;
          },
          [&](const Subdifferential& d) { return subdiff_contains(d.f, x, xstar, tol); },
          [&](const NormalCone& c) { return subdiff_contains(ConvexFn::indicator(c.K), x, xstar, tol); },
          [&](const SupportSubdiff& c) { return subdiff_contains(ConvexFn::support(c.Kt), x, xstar, tol); },
          [&](const Shift& sh) { return contains(*sh.inner, x + sh.dx, xstar + sh.dxstar, tol); },
          [&](const InverseOp& inv) { return contains(*inv.inner, xstar, x, tol); },
          [&](const auto&) {
            const auto r = resolvent(S, x + xstar, 1.0);
            if (!r) return Tri::unknown;
            const double res = (r->point.x - x).norm();
            if (res <= tol && r->residual <= tol) return Tri::yes;
            if (r->converged && res > tol + r->residual) return Tri::no;
            return Tri::unknown;
          },
      },
      S.node());
}

// ---------------------------------------------------------------- interiors

namespace {

template <class Pred>
bool cross_all(const Vec& x, double delta, Pred&& in) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (double sgn : {-1.0, 1.0}) {
      Vec p = x;
      p[i] += sgn * delta;
      if (!in(p)) return false;
    }
  }
  return in(x);
}

Tri both(Tri a, Tri b) {
  if (a == Tri::yes && b == Tri::yes) return Tri::yes;
  if (a == Tri::no || b == Tri::no) return Tri::no;
  return Tri::unknown;
}

}  // namespace

Tri domain_interior_contains(const MonotoneOperator& S, const Vec& x, double delta) {
  check_pair_len(S.pair(), x, "x");
  return std::visit(
      overloaded{
          [](const FiniteGraph&) { return Tri::no; },
          [](const Linear&) { return Tri::yes; },
          [&](const Subdifferential& d) {
            return cross_all(x, delta, [&](const Vec& p) { return in_domain(d.f, p); }) ? Tri::yes : Tri::no;
          },
          [&](const NormalCone& c) { return interior_contains(c.K, x, delta) ? Tri::yes : Tri::no; },
          [](const SupportSubdiff&) { return Tri::yes; },
          [&](const Shift& sh) { return domain_interior_contains(*sh.inner, x + sh.dx, delta); },
          [&](const SumOp& s) {
            return both(domain_interior_contains(*s.S, x, delta), domain_interior_contains(*s.T, x, delta));
          },
          [&](const InverseOp& inv) { return range_interior_contains(*inv.inner, x, delta); },
          [](const ParallelSum&) { return Tri::unknown; },
      },
      S.node());
}

Tri range_interior_contains(const MonotoneOperator& S, const Vec& xstar, double delta) {
  check_pair_len(S.pair(), xstar, "x*");
  return std::visit(
      overloaded{
          [](const FiniteGraph&) { return Tri::no; },
          [&](const Linear& L) {
            Eigen::FullPivLU<Mat> lu(L.M);
            return lu.isInvertible() ? Tri::yes : Tri::no;
          },
          [&](const Subdifferential& d) {
            bool decided = true;
            const bool in = cross_all(xstar, delta, [&](const Vec& p) {
              const auto cv = conjugate(d.f, p);
              if (cv.status == ConjStatus::bounded && !std::isfinite(cv.upper)) decided = false;
              return std::isfinite(cv.upper);
            });
            if (in) return Tri::yes;
            return decided ? Tri::no : Tri::unknown;
          },
          [](const NormalCone&) { return Tri::yes; },
          [&](const SupportSubdiff& c) { return interior_contains(c.Kt, xstar, delta) ? Tri::yes : Tri::no; },
          [&](const Shift& sh) { return range_interior_contains(*sh.inner, xstar + sh.dxstar, delta); },
          [](const SumOp&) { return Tri::unknown; },
          [&](const InverseOp& inv) { return domain_interior_contains(*inv.inner, xstar, delta); },
          [&](const ParallelSum& p) {
            return both(range_interior_contains(*p.S, xstar, delta), range_interior_contains(*p.T, xstar, delta));
          },
      },
      S.node());
}

}  // namespace monolab

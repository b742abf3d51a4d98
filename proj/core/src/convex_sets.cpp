#include "monolab/convex_sets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "monolab/detail/overloaded.hpp"
#include "monolab/detail/simplex.hpp"

namespace monolab {

namespace {

using detail::overloaded;

// Projection residue below this (relative) is treated as membership.
constexpr double kRoundoff = 1e-14;

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

// Point u of the unit ball of `norm` maximizing <u, y>.
Vec unit_argmax(NormTag norm, const Vec& y) { return norm_subgradient(dual(norm), y); }

std::vector<Vec> ball_vertices(const Vec& c, double r, NormTag norm) {
  const auto n = c.size();
  std::vector<Vec> out;
  if (norm == NormTag::L1) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec p = c;
      p[i] += r;
      out.push_back(p);
      p[i] -= 2 * r;
      out.push_back(p);
    }
  } else if (norm == NormTag::LInf) {
    if (n > 12) throw std::invalid_argument("LInf capsule projection limited to dimension 12");
    for (long mask = 0; mask < (1L << n); ++mask) {
      Vec p = c;
      for (Eigen::Index i = 0; i < n; ++i) p[i] += (mask >> i & 1) ? r : -r;
      out.push_back(p);
    }
  } else {
    throw std::logic_error("ball_vertices called for L2");
  }
  return out;
}

Vec project_polytope(const std::vector<Vec>& verts, const Vec& y) {
  std::vector<Vec> shifted;
  shifted.reserve(verts.size());
  for (const auto& v : verts) shifted.push_back(v - y);
  return detail::min_norm_point(shifted) + y;
}

Vec segment_point(const Vec& a, const Vec& b, double t) { return a + t * (b - a); }

// Distance in `norm` from y to the segment [a, b]; convex in t, golden search.
double segment_dist(const Vec& a, const Vec& b, const Vec& y, NormTag norm, double* t_out = nullptr) {
  if ((b - a).squaredNorm() == 0.0) {
    if (t_out) *t_out = 0.0;
    return norm_value(norm, y - a);
  }
  auto f = [&](double t) { return norm_value(norm, y - segment_point(a, b, t)); };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = 1.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  double best_t = 0.0, best = f(0.0);
  for (double t : {1.0, x1, x2, 0.5 * (lo + hi)}) {
    const double v = f(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  if (t_out) *t_out = best_t;
  return best;
}

// Vertex list of a polyhedral set, if it has a manageable one.
std::optional<std::vector<Vec>> polyhedral_vertices(const CompactConvexSet& s) {
  if (const auto* p = std::get_if<Polytope>(&s.shape())) return p->vertices;
  const int n = s.dim();
  if (const auto* b = std::get_if<Ball>(&s.shape())) {
    if (b->norm == NormTag::L1 || (b->norm == NormTag::LInf && n <= 10)) return ball_vertices(b->center, b->radius, b->norm);
  }
  if (const auto* c = std::get_if<Capsule>(&s.shape())) {
    if (c->norm == NormTag::L1 || (c->norm == NormTag::LInf && n <= 9)) {
      auto v = ball_vertices(c->a, c->radius, c->norm);
      for (const auto& w : ball_vertices(c->b, c->radius, c->norm)) v.push_back(w);
      return v;
    }
  }
  return std::nullopt;
}

// min ||y - V lam||_norm over the simplex, for norm L1 or LInf, as an LP.
std::optional<double> polytope_dist_lp(const std::vector<Vec>& verts, const Vec& y, NormTag norm) {
  const int n = static_cast<int>(y.size());
  const int m = static_cast<int>(verts.size());
  // columns: lam (m), e+ (n), e- (n) [, t, slack (n)]
  const bool inf = norm == NormTag::LInf;
  const int cols = m + 2 * n + (inf ? 1 + n : 0);
  const int rows = n + 1 + (inf ? n : 0);
  Mat A = Mat::Zero(rows, cols);
  Vec b = Vec::Zero(rows);
  Vec c = Vec::Zero(cols);
  for (int j = 0; j < m; ++j) {
    A.block(0, j, n, 1) = verts[j];
    A(n, j) = 1.0;
  }
  for (int i = 0; i < n; ++i) {
    A(i, m + i) = 1.0;
    A(i, m + n + i) = -1.0;
  }
  b.head(n) = y;
  b[n] = 1.0;
  if (inf) {
    const int t = m + 2 * n;
    for (int i = 0; i < n; ++i) {
      A(n + 1 + i, m + i) = 1.0;
      A(n + 1 + i, m + n + i) = 1.0;
      A(n + 1 + i, t) = -1.0;
      A(n + 1 + i, t + 1 + i) = 1.0;
    }
    c[t] = 1.0;
  } else {
    c.segment(m, 2 * n).setOnes();
  }
  const auto r = detail::solve_lp(A, b, c);
  if (r.status != detail::LpStatus::optimal) return std::nullopt;
  return std::max(0.0, r.value);
}

}  // namespace

CompactConvexSet CompactConvexSet::polytope(std::vector<Vec> vertices, Side side) {
  if (vertices.empty()) throw std::invalid_argument("polytope needs at least one vertex");
  const auto n = vertices.front().size();
  if (n < 1) throw std::invalid_argument("polytope vertices must be nonempty vectors");
  for (const auto& v : vertices) {
    if (v.size() != n) throw DimensionError("polytope vertices have inconsistent lengths");
    if (!v.allFinite()) throw std::invalid_argument("polytope vertex is not finite");
  }
  return CompactConvexSet(Polytope{std::move(vertices)}, static_cast<int>(n), side);
}

CompactConvexSet CompactConvexSet::ball(Vec center, double radius, NormTag norm, Side side) {
  if (center.size() < 1) throw std::invalid_argument("ball center must be a nonempty vector");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball radius must be finite and >= 0");
  if (!center.allFinite()) throw std::invalid_argument("ball center is not finite");
  const int n = static_cast<int>(center.size());
  return CompactConvexSet(Ball{std::move(center), radius, norm}, n, side);
}

CompactConvexSet CompactConvexSet::capsule(Vec a, Vec b, double radius, NormTag norm, Side side) {
  if (a.size() < 1 || a.size() != b.size()) throw DimensionError("capsule endpoints must have equal positive length");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw std::invalid_argument("capsule radius must be finite and >= 0");
  if (!a.allFinite() || !b.allFinite()) throw std::invalid_argument("capsule endpoint is not finite");
  const int n = static_cast<int>(a.size());
  return CompactConvexSet(Capsule{std::move(a), std::move(b), radius, norm}, n, side);
}

CompactConvexSet CompactConvexSet::singleton(Vec point, Side side) {
  std::vector<Vec> v{std::move(point)};
  return polytope(std::move(v), side);
}

CompactConvexSet CompactConvexSet::interval(double lo, double hi, Side side) {
  if (!(lo <= hi)) throw std::invalid_argument("interval needs lo <= hi");
  std::vector<Vec> v{Vec::Constant(1, lo), Vec::Constant(1, hi)};
  if (lo == hi) v.pop_back();
  return polytope(std::move(v), side);
}

CompactConvexSet CompactConvexSet::box(const Vec& lo, const Vec& hi, Side side) {
  if (lo.size() != hi.size() || lo.size() < 1) throw DimensionError("box bounds must have equal positive length");
  if (lo.size() > 12) throw std::invalid_argument("box is limited to dimension 12");
  if ((hi - lo).minCoeff() < 0) throw std::invalid_argument("box needs lo <= hi");
  const auto n = lo.size();
  std::vector<Vec> v;
  for (long mask = 0; mask < (1L << n); ++mask) {
    Vec p(n);
    for (Eigen::Index i = 0; i < n; ++i) p[i] = (mask >> i & 1) ? hi[i] : lo[i];
    v.push_back(p);
  }
  return polytope(std::move(v), side);
}

CompactConvexSet CompactConvexSet::negated() const {
  return std::visit(overloaded{
                        [&](const Polytope& p) {
                          std::vector<Vec> v;
                          for (const auto& x : p.vertices) v.push_back(-x);
                          return polytope(std::move(v), side_);
                        },
                        [&](const Ball& b) { return ball(-b.center, b.radius, b.norm, side_); },
                        [&](const Capsule& c) { return capsule(-c.a, -c.b, c.radius, c.norm, side_); },
                    },
                    shape_);
}

CompactConvexSet CompactConvexSet::on_side(Side s) const {
  CompactConvexSet out = *this;
  out.side_ = s;
  return out;
}

std::optional<Vec> CompactConvexSet::singleton_point() const {
  return std::visit(overloaded{
                        [](const Polytope& p) -> std::optional<Vec> {
                          for (const auto& v : p.vertices)
                            if (v != p.vertices.front()) return std::nullopt;
                          return p.vertices.front();
                        },
                        [](const Ball& b) -> std::optional<Vec> {
                          if (b.radius == 0.0) return b.center;
                          return std::nullopt;
                        },
                        [](const Capsule& c) -> std::optional<Vec> {
                          if (c.radius == 0.0 && c.a == c.b) return c.a;
                          return std::nullopt;
                        },
                    },
                    shape_);
}

Vec CompactConvexSet::center_point() const {
  return std::visit(overloaded{
                        [](const Polytope& p) {
                          Vec c = Vec::Zero(p.vertices.front().size());
                          for (const auto& v : p.vertices) c += v;
                          return Vec(c / static_cast<double>(p.vertices.size()));
                        },
                        [](const Ball& b) { return b.center; },
                        [](const Capsule& c) { return Vec(0.5 * (c.a + c.b)); },
                    },
                    shape_);
}

double CompactConvexSet::diameter_bound() const {
  const double sqn = std::sqrt(static_cast<double>(dim_));
  // Euclidean radius of a unit ball in each norm.
  auto euclid_scale = [&](NormTag t) { return t == NormTag::LInf ? sqn : 1.0; };
  return std::visit(overloaded{
                        [](const Polytope& p) {
                          double d = 0.0;
                          for (const auto& u : p.vertices)
                            for (const auto& v : p.vertices) d = std::max(d, (u - v).norm());
                          return d;
                        },
                        [&](const Ball& b) { return 2.0 * b.radius * euclid_scale(b.norm); },
                        [&](const Capsule& c) { return (c.a - c.b).norm() + 2.0 * c.radius * euclid_scale(c.norm); },
                    },
                    shape_);
}

std::vector<Vec> CompactConvexSet::seed_points() const {
  std::vector<Vec> out;
  std::visit(overloaded{
                 [&](const Polytope& p) { out = p.vertices; },
                 [&](const Ball& b) { out.push_back(b.center); },
                 [&](const Capsule& c) {
                   out.push_back(c.a);
                   out.push_back(c.b);
                 },
             },
             shape_);
  out.push_back(center_point());
  return out;
}

double support(const CompactConvexSet& s, const Vec& y) {
  if (y.size() != s.dim()) throw DimensionError("support argument has wrong length");
  return std::visit(overloaded{
                        [&](const Polytope& p) {
                          double m = -kInf;
                          for (const auto& v : p.vertices) m = std::max(m, v.dot(y));
                          return m;
                        },
                        [&](const Ball& b) { return b.center.dot(y) + b.radius * norm_value(dual(b.norm), y); },
                        [&](const Capsule& c) {
                          return std::max(c.a.dot(y), c.b.dot(y)) + c.radius * norm_value(dual(c.norm), y);
                        },
                    },
                    s.shape());
}

Vec argmax_support(const CompactConvexSet& s, const Vec& y) {
  if (y.size() != s.dim()) throw DimensionError("argmax_support argument has wrong length");
  return std::visit(overloaded{
                        [&](const Polytope& p) {
                          double m = -kInf;
                          for (const auto& v : p.vertices) m = std::max(m, v.dot(y));
                          const double tie = 1e-12 * std::max(1.0, std::abs(m));
                          const Vec* best = nullptr;
                          for (const auto& v : p.vertices) {
                            if (v.dot(y) >= m - tie && (!best || lex_less(v, *best))) best = &v;
                          }
                          return *best;
                        },
                        [&](const Ball& b) { return Vec(b.center + b.radius * unit_argmax(b.norm, y)); },
                        [&](const Capsule& c) {
                          const double da = c.a.dot(y), db = c.b.dot(y);
                          const double tie = 1e-12 * std::max({1.0, std::abs(da), std::abs(db)});
                          const Vec* e = &c.a;
                          if (db > da + tie || (std::abs(db - da) <= tie && lex_less(c.b, c.a))) e = &c.b;
                          return Vec(*e + c.radius * unit_argmax(c.norm, y));
                        },
                    },
                    s.shape());
}

Vec project(const CompactConvexSet& s, const Vec& y) {
  if (y.size() != s.dim()) throw DimensionError("project argument has wrong length");
  return std::visit(overloaded{
                        [&](const Polytope& p) {
                          if (p.vertices.size() == 1) return p.vertices.front();
                          return project_polytope(p.vertices, y);
                        },
                        [&](const Ball& b) -> Vec {
                          const Vec d = y - b.center;
                          switch (b.norm) {
                            case NormTag::L2: {
                              const double n = d.norm();
                              if (n <= b.radius) return y;
                              return b.center + (b.radius / n) * d;
                            }
                            case NormTag::LInf:
                              return b.center + d.cwiseMax(-b.radius).cwiseMin(b.radius);
                            case NormTag::L1:
                              return b.center + detail::project_l1_ball(d, b.radius);
                          }
                          return y;
                        },
                        [&](const Capsule& c) -> Vec {
                          if (c.norm == NormTag::L2 || c.radius == 0.0) {
                            const Vec ab = c.b - c.a;
                            const double l2 = ab.squaredNorm();
                            const double t = l2 > 0 ? std::clamp((y - c.a).dot(ab) / l2, 0.0, 1.0) : 0.0;
                            const Vec p = segment_point(c.a, c.b, t);
                            const double d = (y - p).norm();
                            if (d <= c.radius) return y;
                            return p + (c.radius / d) * (y - p);
                          }
                          std::vector<Vec> verts = ball_vertices(c.a, c.radius, c.norm);
                          for (const auto& v : ball_vertices(c.b, c.radius, c.norm)) verts.push_back(v);
                          return project_polytope(verts, y);
                        },
                    },
                    s.shape());
}

DistResult dist(const CompactConvexSet& s, const Vec& y, NormTag norm, const DistOptions& opts) {
  if (y.size() != s.dim()) throw DimensionError("dist argument has wrong length");
  DistResult r;
  r.exact = true;
  if (norm == NormTag::L2 || s.dim() == 1) {
    r.value = norm_value(norm, y - project(s, y));
    if (r.value <= kRoundoff * (1.0 + y.norm())) r.value = 0.0;
    r.lower_bound = r.value;
    return r;
  }
  if (const auto* b = std::get_if<Ball>(&s.shape()); b && b->norm == norm) {
    r.value = r.lower_bound = std::max(0.0, norm_value(norm, y - b->center) - b->radius);
    return r;
  }
  if (const auto* c = std::get_if<Capsule>(&s.shape()); c && c->norm == norm) {
    r.value = r.lower_bound = std::max(0.0, segment_dist(c->a, c->b, y, norm) - c->radius);
    return r;
  }
  if (auto pt = s.singleton_point()) {
    r.value = r.lower_bound = norm_value(norm, y - *pt);
    return r;
  }
  Vec z = project(s, y);
  r.value = norm_value(norm, y - z);
  if (r.value <= kRoundoff * (1.0 + y.norm())) {
    r.value = r.lower_bound = 0.0;
    return r;
  }
  if (auto verts = polyhedral_vertices(s)) {
    if (auto d = polytope_dist_lp(*verts, y, norm)) {
      r.value = r.lower_bound = *d;
      return r;
    }
  }
  r.exact = false;

  // Any u with ||u||_dual <= 1 certifies <u, y> - support(u) <= dist.
  auto certify = [&](const Vec& u) { r.lower_bound = std::max(r.lower_bound, u.dot(y) - support(s, u)); };
  const double tol = opts.tol * (1.0 + r.value);
  const double scale = std::max(s.diameter_bound(), 1e-12);
  int k = 0;
  for (; k < opts.max_iter; ++k) {
    const Vec g = norm_subgradient(norm, y - z);
    certify(g);
    if (r.value - r.lower_bound <= tol) break;
    const double gn = g.norm();
    if (gn == 0.0) break;
    z = project(s, z + (scale / std::sqrt(k + 1.0)) * g / gn);
    const double v = norm_value(norm, y - z);
    if (v < r.value) r.value = v;
  }
  r.lower_bound = std::max(0.0, std::min(r.lower_bound, r.value));
  r.iterations = k;
  r.converged = r.value - r.lower_bound <= tol;
  return r;
}

bool contains(const CompactConvexSet& s, const Vec& y, double tol) {
  if (y.size() != s.dim()) throw DimensionError("contains argument has wrong length");
  if (const auto* b = std::get_if<Ball>(&s.shape())) {
    return norm_value(b->norm, y - b->center) <= b->radius + tol;
  }
  return (y - project(s, y)).norm() <= tol;
}

bool interior_contains(const CompactConvexSet& s, const Vec& y, double margin) {
  if (y.size() != s.dim()) throw DimensionError("interior_contains argument has wrong length");
  if (const auto* b = std::get_if<Ball>(&s.shape())) {
    return norm_value(b->norm, y - b->center) + margin <= b->radius;
  }
  if (const auto* c = std::get_if<Capsule>(&s.shape())) {
    return segment_dist(c->a, c->b, y, c->norm) + margin <= c->radius;
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    for (double sgn : {-1.0, 1.0}) {
      Vec p = y;
      p[i] += sgn * margin;
      if (!contains(s, p, 1e-13)) return false;
    }
  }
  return true;
}

Vec sample_point(const CompactConvexSet& s, Rng& rng) {
  auto in_unit_ball = [&](NormTag t, Eigen::Index n) {
    Vec v = rng.uniform_vec(static_cast<int>(n), -1.0, 1.0);
    const double nv = norm_value(t, v);
    if (nv > 1.0) v /= nv;
    return Vec(v * rng.uniform());
  };
  return std::visit(overloaded{
                        [&](const Polytope& p) {
                          Vec w(static_cast<Eigen::Index>(p.vertices.size()));
                          for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = -std::log(1.0 - rng.uniform());
                          w /= w.sum();
                          Vec out = Vec::Zero(p.vertices.front().size());
                          for (Eigen::Index i = 0; i < w.size(); ++i) out += w[i] * p.vertices[i];
                          return out;
                        },
                        [&](const Ball& b) { return Vec(b.center + b.radius * in_unit_ball(b.norm, b.center.size())); },
                        [&](const Capsule& c) {
                          const Vec p = segment_point(c.a, c.b, rng.uniform());
                          return Vec(p + c.radius * in_unit_ball(c.norm, c.a.size()));
                        },
                    },
                    s.shape());
}

namespace detail {

Vec project_l1_ball(const Vec& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  if (radius <= 0.0) return Vec::Zero(v.size());
  std::vector<double> u(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0) theta = t;
  }
  Vec w(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::max(std::abs(v[i]) - theta, 0.0);
    w[i] = v[i] >= 0 ? a : -a;
  }
  return w;
}

Vec min_norm_point(const std::vector<Vec>& pts, Vec* weights) {
  const auto m = static_cast<Eigen::Index>(pts.size());
  if (m == 0) throw std::invalid_argument("min_norm_point needs points");
  const auto n = pts.front().size();
  double max_sq = 0.0;
  Eigen::Index start = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double q = pts[i].squaredNorm();
    if (q > max_sq) max_sq = q;
    if (q < pts[start].squaredNorm()) start = i;
  }
  std::vector<Eigen::Index> S{start};
  std::vector<double> lam{1.0};
  Vec x = pts[start];
  const double eps1 = 1e-15 * std::max(1.0, max_sq);
  const double eps2 = 1e-13;

  auto assemble = [&]() {
    x = Vec::Zero(n);
    for (std::size_t k = 0; k < S.size(); ++k) x += lam[k] * pts[S[k]];
  };

  for (int major = 0; major < 2000; ++major) {
    Eigen::Index j = 0;
    double best = kInf;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double d = x.dot(pts[i]);
      if (d < best) {
        best = d;
        j = i;
      }
    }
    if (x.squaredNorm() - best <= eps1) break;
    if (std::find(S.begin(), S.end(), j) != S.end()) break;
    S.push_back(j);
    lam.push_back(0.0);

    // Each minor step drops at least one point from S.
    for (std::size_t minor = 0; minor <= S.size() + 1; ++minor) {
      // Affine minimizer in difference coordinates; the Gram system of the
      // points themselves is ill-conditioned when they lie far from 0.
      const auto k = static_cast<Eigen::Index>(S.size());
      const Vec& base = pts[S[0]];
      Vec a(k);
      a[0] = 1.0;
      if (k > 1) {
        Mat D(n, k - 1);
        for (Eigen::Index c = 1; c < k; ++c) D.col(c - 1) = pts[S[c]] - base;
        const Vec coef = D.completeOrthogonalDecomposition().solve(Vec(-base));
        a.tail(k - 1) = coef;
        a[0] = 1.0 - coef.sum();
      }
      if (a.minCoeff() > eps2) {
        for (Eigen::Index c = 0; c < k; ++c) lam[c] = a[c];
        assemble();
        break;
      }
      double theta = 1.0;
      for (Eigen::Index c = 0; c < k; ++c) {
        if (a[c] <= eps2) {
          const double den = lam[c] - a[c];
          if (den > 0) theta = std::min(theta, lam[c] / den);
        }
      }
      theta = std::clamp(theta, 0.0, 1.0);
      for (Eigen::Index c = 0; c < k; ++c) lam[c] = theta * a[c] + (1.0 - theta) * lam[c];
      std::vector<Eigen::Index> S2;
      std::vector<double> lam2;
      for (Eigen::Index c = 0; c < k; ++c) {
        if (lam[c] > eps2) {
          S2.push_back(S[c]);
          lam2.push_back(lam[c]);
        }
      }
      if (S2.empty()) {
        S2.push_back(S.back());
        lam2.push_back(1.0);
      }
      const double tot = std::accumulate(lam2.begin(), lam2.end(), 0.0);
      for (auto& l : lam2) l /= tot;
      S = std::move(S2);
      lam = std::move(lam2);
      assemble();
    }
  }
  if (weights) {
    *weights = Vec::Zero(m);
    for (std::size_t k = 0; k < S.size(); ++k) (*weights)[S[k]] += lam[k];
  }
  return x;
}

}  // namespace detail

}  // namespace monolab

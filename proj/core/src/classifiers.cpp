#include "monolab/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "monolab/detail/search.hpp"
#include "monolab/fitzpatrick.hpp"
#include "monolab/rng.hpp"

namespace monolab {

namespace {

constexpr double kWindowMargin = 1e-9;
constexpr double kPremiseTol = 1e-9;
constexpr double kMemberTol = 1e-7;
constexpr double kFoundTol = 1e-6;
constexpr double kYosidaLambda = 1e-7;
// Graph searches below this value are reported as unbounded.
constexpr double kDivergent = -1e12;

bool usable(const std::optional<ResolventPoint>& r) { return r && r->converged && r->residual <= 1e-6; }

bool is_finite_graph(const MonotoneOperator& S) { return std::holds_alternative<FiniteGraph>(S.node()); }

// Non-owning handle, so combinators can wrap an operator held by reference.
OperatorPtr borrow(const MonotoneOperator& S) { return OperatorPtr(OperatorPtr(), &S); }

struct Scored {
  PairedPoint p;
  double v;
};

// Lowest-scoring graph points among `pts` that pass `keep`, refined by a
// pattern search over resolvent parameters for operators with a resolvent.
struct MinSearch {
  double worst = kInf;
  std::optional<PairedPoint> witness;
  int kept = 0;
};

MinSearch minimize_over_graph(const MonotoneOperator& S, const std::vector<PairedPoint>& pts,
                              const std::function<bool(const PairedPoint&)>& keep,
                              const std::function<double(const PairedPoint&)>& score, double step,
                              double stop_below) {
  MinSearch out;
  std::vector<Scored> kept;
  for (const auto& p : pts) {
    if (!keep(p)) continue;
    kept.push_back({p, score(p)});
  }
  out.kept = static_cast<int>(kept.size());
  for (const auto& k : kept) {
    if (k.v < out.worst) {
      out.worst = k.v;
      out.witness = k.p;
    }
  }
  if (kept.empty() || out.worst < stop_below || is_finite_graph(S)) return out;

  std::sort(kept.begin(), kept.end(), [](const Scored& a, const Scored& b) { return a.v < b.v; });
  const std::size_t starts = std::min<std::size_t>(3, kept.size());
  for (std::size_t i = 0; i < starts && out.worst >= stop_below && out.worst >= kDivergent; ++i) {
    const Vec z0 = kept[i].p.x + kept[i].p.xstar;
    const double zcap = 1e4 * (1.0 + z0.lpNorm<Eigen::Infinity>());
    auto f = [&](const Vec& z) {
      // Far parameters only slow the inner solvers down.
      if (z.lpNorm<Eigen::Infinity>() > zcap) return kInf;
      const auto r = resolvent(S, z);
      if (!usable(r) || !keep(r->point)) return kInf;
      const double v = score(r->point);
      if (v < out.worst) {
        out.worst = v;
        out.witness = r->point;
      }
      return v;
    };
    detail::pattern_search(f, z0, step, 200, std::max(stop_below, kDivergent));
  }
  if (out.worst < kDivergent) out.worst = -kInf;
  return out;
}

std::vector<PairedPoint> windowed_samples(const MonotoneOperator& S, const LocalWindow& U, const Vec& w,
                                          const Vec& wstar, int budget, std::uint64_t seed) {
  const double R = std::max(2.0, U.region().diameter_bound());
  SampleOptions so;
  so.radius = R;
  so.center = Vec(w + wstar);
  auto pts = graph_sample(S, std::max(1, budget / 2), seed, so).points;

  // Targeted parameters: a window point on its own side plus a jittered
  // copy of the fixed component on the other.
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int n = S.dim();
  std::vector<Vec> zs;
  for (int k = 0; k < budget - budget / 2; ++k) {
    const Vec u = sample_point(U.region(), rng);
    const Vec jitter = rng.uniform_vec(n, -R / 2, R / 2);
    zs.push_back(U.side() == Side::primal ? Vec(u + wstar + jitter) : Vec(w + u + jitter));
  }
  const auto extra = graph_sample_at(S, zs).points;
  pts.insert(pts.end(), extra.begin(), extra.end());
  return pts;
}

ClassifierVerdict windowed_check(const MonotoneOperator& S, const LocalWindow& U, const Vec& w, const Vec& wstar,
                                 int budget, std::uint64_t seed) {
  if (budget <= 0) throw std::invalid_argument("budget must be positive");
  S.pair().check(w, "w");
  S.pair().check(wstar, "w*");
  if (U.dim() != S.dim()) throw DimensionError("window dimension does not match the operator");

  const bool primal = U.side() == Side::primal;
  if (!U.contains(primal ? w : wstar)) {
    throw std::invalid_argument(primal ? "w must lie in the open window U" : "w* must lie in the open window U~");
  }

  ClassifierVerdict out;
  out.budget = budget;
  out.seed = seed;
  const auto pts = windowed_samples(S, U, w, wstar, budget, seed);
  auto keep = [&](const PairedPoint& p) { return U.contains(primal ? p.x : p.xstar); };
  auto score = [&](const PairedPoint& p) { return (p.x - w).dot(p.xstar - wstar); };
  const auto m = minimize_over_graph(S, pts, keep, score, std::max(2.0, U.region().diameter_bound()) / 8,
                                     -kPremiseTol);
  out.in_window = m.kept;
  out.vacuous = m.kept == 0;
  out.worst = m.worst;
  out.witness = m.witness;
  out.premise_holds = !out.vacuous && m.worst >= -kPremiseTol;
  out.conclusion_holds = contains(S, w, wstar, kMemberTol);
  out.consistent_with_class = !(out.premise_holds && out.conclusion_holds == Tri::no);
  return out;
}

// Approximate projection of y onto S(p): the Yosida value at p + lambda y.
std::optional<Vec> yosida_projection(const MonotoneOperator& S, const Vec& p, const Vec& y) {
  const auto r = resolvent(S, Vec(p + kYosidaLambda * y), kYosidaLambda);
  if (!usable(r)) return std::nullopt;
  return r->point.xstar;
}

struct Found {
  std::optional<Vec> point;
  double residual = kInf;
};

// Searches q in K with (p, q) in G(S): alternating Yosida projections and
// projections onto K, then a pattern search over the projected parameter.
Found search_in_set(const MonotoneOperator& S, const Vec& p, const CompactConvexSet& K,
                    const std::function<double(const Vec&)>& residual_at) {
  Found best;
  auto consider = [&](const Vec& q) {
    const double r = residual_at(q);
    if (r < best.residual) {
      best.residual = r;
      best.point = q;
    }
    return r;
  };

  std::vector<Vec> starts = K.seed_points();
  starts.insert(starts.begin(), K.center_point());
  for (const auto& s0 : starts) {
    Vec y = s0;
    consider(project(K, y));
    for (int it = 0; it < 200 && best.residual > 1e-12; ++it) {
      const auto q = yosida_projection(S, p, y);
      if (!q) break;
      const Vec next = project(K, *q);
      consider(next);
      if ((next - y).norm() <= 1e-14 * (1.0 + y.norm())) break;
      y = next;
    }
    if (best.residual <= 1e-12) return best;
  }
  if (best.residual > 1e-9 && best.point) {
    auto f = [&](const Vec& y) { return consider(project(K, y)); };
    detail::pattern_search(f, *best.point, std::max(1e-3, K.diameter_bound() / 4), 600);
  }
  return best;
}

StrongMaxVerdict strong_max(const MonotoneOperator& S, const Vec& fixed, const CompactConvexSet& set, bool dual_set,
                            int budget, std::uint64_t seed) {
  if (budget <= 0) throw std::invalid_argument("budget must be positive");
  S.pair().check(fixed, dual_set ? "w" : "w*");
  if (set.dim() != S.dim()) throw DimensionError("set dimension does not match the operator");

  StrongMaxVerdict out;
  SampleOptions so;
  so.radius = std::max(2.0, set.diameter_bound());
  so.center = Vec(fixed + set.center_point());
  const auto pts = graph_sample(S, budget, seed, so).points;
  out.samples = static_cast<int>(pts.size());

  // max over the set of <s - w, s* - w*> with one side ranging over it.
  auto score = [&](const PairedPoint& p) {
    if (dual_set) {
      const Vec a = p.x - fixed;
      return a.dot(p.xstar) + support(set, Vec(-a));
    }
    const Vec b = p.xstar - fixed;
    return p.x.dot(b) + support(set, Vec(-b));
  };
  const auto m = minimize_over_graph(
      S, pts, [](const PairedPoint&) { return true; }, score, so.radius / 8, -kPremiseTol);
  out.worst = m.worst;
  out.witness = m.witness;
  out.premise_holds = !pts.empty() && m.worst >= -kPremiseTol;
  if (!out.premise_holds) return out;

  Found f;
  if (dual_set) {
    f = search_in_set(S, fixed, set, [&](const Vec& q) { return membership_residual(S, fixed, q); });
  } else {
    const auto inv = MonotoneOperator::inverse(borrow(S));
    f = search_in_set(*inv, fixed, set, [&](const Vec& q) { return membership_residual(S, q, fixed); });
  }
  out.residual = f.residual;
  if (f.point && f.residual <= kFoundTol) {
    out.found = f.point;
    out.outcome = Tri::yes;
  }
  return out;
}

}  // namespace

LocalWindow LocalWindow::ball(Vec center, double radius, Side side) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("window radius must be positive");
  return LocalWindow(CompactConvexSet::ball(std::move(center), radius, NormTag::L2, side), side);
}

LocalWindow LocalWindow::polytope(std::vector<Vec> vertices, Side side) {
  if (vertices.empty()) throw std::invalid_argument("window needs at least one vertex");
  const Eigen::Index n = vertices.front().size();
  Mat D(n, static_cast<Eigen::Index>(vertices.size()) - 1);
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    if (vertices[i].size() != n) throw DimensionError("window vertices differ in length");
    D.col(static_cast<Eigen::Index>(i) - 1) = vertices[i] - vertices.front();
  }
  Eigen::FullPivLU<Mat> lu(D);
  lu.setThreshold(1e-10);
  if (D.cols() == 0 || lu.rank() < n) throw std::invalid_argument("window has empty interior");
  return LocalWindow(CompactConvexSet::polytope(std::move(vertices), side), side);
}

bool LocalWindow::contains(const Vec& y) const { return interior_contains(region_, y, kWindowMargin); }

ClassifierVerdict check_fpv(const MonotoneOperator& S, const LocalWindow& U, const Vec& w, const Vec& wstar,
                            int budget, std::uint64_t seed) {
  if (U.side() != Side::primal) throw std::invalid_argument("check_fpv needs a primal window");
  return windowed_check(S, U, w, wstar, budget, seed);
}

ClassifierVerdict check_fp(const MonotoneOperator& S, const LocalWindow& Ut, const Vec& w, const Vec& wstar,
                           int budget, std::uint64_t seed) {
  if (Ut.side() != Side::dual) throw std::invalid_argument("check_fp needs a dual window");
  return windowed_check(S, Ut, w, wstar, budget, seed);
}

NiResult ni_infimum(const MonotoneOperator& S, const Vec& wstar, const Vec& wstarstar, int budget,
                    std::uint64_t seed) {
  if (budget <= 0) throw std::invalid_argument("budget must be positive");
  S.pair().check(wstar, "w*");
  S.pair().check(wstarstar, "w**");

  NiResult out;
  SampleOptions so;
  so.radius = std::max(2.0, wstar.lpNorm<Eigen::Infinity>() + wstarstar.lpNorm<Eigen::Infinity>());
  so.center = Vec(wstarstar + wstar);
  const auto pts = graph_sample(S, budget, seed, so).points;
  auto score = [&](const PairedPoint& p) { return (p.xstar - wstar).dot(p.x - wstarstar); };
  const auto m = minimize_over_graph(
      S, pts, [](const PairedPoint&) { return true; }, score, so.radius / 8, -kInf);
  out.sampled = m.worst;
  out.witness = m.witness;
  out.value = m.worst;

  FitzOptions fo;
  fo.seed = seed;
  fo.budget = budget;
  const auto th = theta(S, wstar, wstarstar, fo);
  if (th.status == FitzStatus::exact) {
    out.dual = wstar.dot(wstarstar) - th.value;
    out.value = *out.dual;
  }
  return out;
}

StrongMaxVerdict strong_max_dual(const MonotoneOperator& S, const Vec& w, const CompactConvexSet& Wt, int budget,
                                 std::uint64_t seed) {
  return strong_max(S, w, Wt, true, budget, seed);
}

StrongMaxVerdict strong_max_primal(const MonotoneOperator& S, const CompactConvexSet& W, const Vec& wstar, int budget,
                                   std::uint64_t seed) {
  return strong_max(S, wstar, W, false, budget, seed);
}

SeqcharVerdict seqchar_check(const MonotoneOperator& S, const Vec& zstar, const Vec& zstarstar,
                             const std::vector<PairedPoint>& sequence, const Vec& w, const Vec& wstar, double tol) {
  if (sequence.size() < 8) throw std::invalid_argument("seqchar_check needs at least 8 terms");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const auto& pair = S.pair();
  pair.check(zstar, "z*");
  pair.check(zstarstar, "z**");
  pair.check(w, "w");
  pair.check(wstar, "w*");
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const auto& p = sequence[i];
    pair.check(p.x, "sequence term");
    pair.check(p.xstar, "sequence term");
    if (contains(S, p.x, p.xstar, tol) == Tri::no) {
      throw std::invalid_argument("sequence term " + std::to_string(i) + " is not in the graph");
    }
  }

  const double limit = (zstar - wstar).dot(zstarstar - w);
  const int N = static_cast<int>(sequence.size());
  std::vector<double> e(N), b(N);
  for (int i = 0; i < N; ++i) {
    const auto& p = sequence[i];
    e[i] = std::abs((p.x - w).dot(p.xstar - wstar) - limit);
    b[i] = norm(pair, Vec(p.xstar - zstar), Side::dual);
  }

  SeqcharVerdict out;
  out.pairing_error = e.back();
  out.dual_error = b.back();
  const int q = N - N / 4;
  for (int i = q; i < N; ++i) {
    if (e[i] > e[i - 1] + tol || b[i] > b[i - 1] + tol) {
      out.counterexample = i;
      return out;
    }
  }
  auto spread = [&](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin() + q - 1, v.end());
    return *hi - *lo;
  };
  if (e.back() > tol + 4.0 * spread(e) || b.back() > tol + 4.0 * spread(b)) {
    out.counterexample = N - 1;
    return out;
  }
  out.consistent = true;
  return out;
}

}  // namespace monolab

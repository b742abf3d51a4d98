#include "monolab/quasidensity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "monolab/detail/overloaded.hpp"
#include "monolab/detail/search.hpp"
#include "monolab/rng.hpp"

namespace monolab {

std::string to_string(GapStatus s) { return s == GapStatus::exact ? "exact" : "upper_bound"; }

std::string to_string(GapMethod m) {
  switch (m) {
    case GapMethod::enumeration: return "enumeration";
    case GapMethod::resolvent: return "resolvent";
    case GapMethod::subgradient_descent: return "subgradient_descent";
    case GapMethod::pattern_search: return "pattern_search";
  }
  return "unknown";
}

namespace {

using Objective = std::function<double(const PairedPoint&)>;

using detail::pattern_search;

GapReport enumerate(const std::vector<PairedPoint>& pts, const Objective& obj) {
  GapReport rep;
  rep.method = GapMethod::enumeration;
  rep.status = GapStatus::exact;
  for (const auto& p : pts) {
    const double v = obj(p);
    ++rep.steps;
    if (v < rep.value) {
      rep.value = v;
      rep.witness = p;
    }
  }
  return rep;
}

// Multi-start pattern search over z, with (s, s*) = J(z) (Euclidean resolvent).
GapReport param_search(const MonotoneOperator& S, const Objective& obj, std::vector<Vec> seeds, const Vec& center,
                       const GapOptions& opts) {
  SampleOptions so;
  so.center = center;
  const auto sample = graph_sample(S, opts.budget, opts.seed, so);
  std::vector<std::pair<double, Vec>> cands;
  for (const auto& p : sample.points) cands.emplace_back(obj(p), p.x + p.xstar);
  for (auto& z : seeds) {
    if (const auto r = resolvent(S, z)) cands.emplace_back(obj(r->point), std::move(z));
  }
  GapReport rep;
  rep.method = GapMethod::pattern_search;
  rep.status = GapStatus::upper_bound;
  if (cands.empty()) return rep;
  std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  auto f = [&](const Vec& z) {
    const auto r = resolvent(S, z);
    if (!r || !r->converged) return kInf;
    return obj(r->point);
  };
  Vec best_z = cands.front().second;
  double best = kInf;
  const int runs = std::min<int>(opts.starts, static_cast<int>(cands.size()));
  for (int k = 0; k < runs; ++k) {
    const auto pr = pattern_search(f, cands[k].second, 0.5, opts.pattern_evals);
    rep.steps += pr.evals;
    ++rep.restarts;
    if (pr.value < best) {
      best = pr.value;
      best_z = pr.x;
    }
  }
  const auto r = resolvent(S, best_z);
  if (r) {
    rep.witness = r->point;
    rep.value = obj(r->point);
  }
  return rep;
}

// Subgradient descent over s with s* = M s, steps c/sqrt(k) along the
// normalized subgradient, then a pattern-search polish of the best point.
GapReport linear_descent(const DualPair& pair, const Mat& M, const PairedPoint& t, const GapOptions& opts) {
  const int n = pair.dim();
  const NormTag pn = pair.primal_norm(), dn = pair.dual_norm();
  auto F = [&](const Vec& s, Vec* g) {
    const Vec a = s - t.x;
    const Vec b = M * s - t.xstar;
    const double na = norm_value(pn, a), nb = norm_value(dn, b);
    if (g) *g = na * norm_subgradient(pn, a) + M.transpose() * (nb * norm_subgradient(dn, b)) + b + M.transpose() * a;
    return 0.5 * na * na + 0.5 * nb * nb + a.dot(b);
  };

  const double scale = 1.0 + t.x.lpNorm<Eigen::Infinity>() + t.xstar.lpNorm<Eigen::Infinity>();
  std::vector<Vec> starts = {t.x, Vec::Zero(n)};
  starts.push_back(M.completeOrthogonalDecomposition().solve(t.xstar));
  const Mat IM = Mat::Identity(n, n) + M;
  starts.push_back(IM.completeOrthogonalDecomposition().solve(t.x + t.xstar));
  Rng rng(opts.seed);
  while (static_cast<int>(starts.size()) < opts.starts) starts.push_back(rng.uniform_vec(n, -scale, scale));
  starts.resize(std::max(1, std::min<int>(opts.starts, static_cast<int>(starts.size()))));

  GapReport rep;
  rep.method = GapMethod::subgradient_descent;
  rep.status = GapStatus::upper_bound;
  Vec best_s = starts.front();
  double best = kInf;
  const double c = 0.5 * scale;
  Vec g(n);
  for (const auto& s0 : starts) {
    ++rep.restarts;
    Vec s = s0;
    int last = 0;
    for (int k = 1; k <= opts.max_steps; ++k) {
      ++rep.steps;
      const double v = F(s, &g);
      if (v < best) {
        if (v < best - 1e-12 * (1.0 + std::abs(best))) last = k;
        best = v;
        best_s = s;
      }
      const double gn = g.norm();
      if (gn == 0.0 || k - last > opts.stall_steps) break;
      s -= (c / std::sqrt(static_cast<double>(k))) / gn * g;
    }
  }
  const auto pr = pattern_search([&](const Vec& s) { return F(s, nullptr); }, best_s, 1e-2 * scale,
                                 opts.pattern_evals);
  rep.steps += pr.evals;
  if (pr.value < best) best_s = pr.x;
  rep.witness = {best_s, M * best_s};
  rep.value = r_objective(pair, rep.witness, t);
  return rep;
}

GapReport euclidean_gap(const MonotoneOperator& S, const PairedPoint& t, const GapOptions& opts) {
  const Vec z = t.x + t.xstar;
  if (const auto* L = std::get_if<Linear>(&S.node())) {
    const Mat IM = Mat::Identity(S.dim(), S.dim()) + L->M;
    GapReport rep;
    rep.method = GapMethod::resolvent;
    rep.status = GapStatus::exact;
    // Least squares covers singular I + M: the gap is 1/2 dist(z, range)^2.
    const Vec s = IM.completeOrthogonalDecomposition().solve(z);
    rep.witness = {s, L->M * s};
    rep.value = r_objective(S.pair(), rep.witness, t);
    rep.steps = 1;
    return rep;
  }
  const auto r = resolvent(S, z);
  if (!r) {
    auto obj = [&](const PairedPoint& p) { return r_objective(S.pair(), p, t); };
    return param_search(S, obj, {z}, z, opts);
  }
  GapReport rep;
  rep.method = GapMethod::resolvent;
  rep.witness = r->point;
  rep.value = r_objective(S.pair(), r->point, t);
  rep.status = r->converged ? GapStatus::exact : GapStatus::upper_bound;
  rep.steps = 1;
  return rep;
}

std::pair<double, bool> dist_value(const CompactConvexSet& K, const Vec& y, NormTag norm) {
  const auto d = dist(K, y, norm);
  return {d.value, d.exact};
}

}  // namespace

GapReport gap(const MonotoneOperator& S, const PairedPoint& t, const GapOptions& opts) {
  S.pair().check(t.x, "target x");
  S.pair().check(t.xstar, "target x*");
  if (const auto* g = std::get_if<FiniteGraph>(&S.node())) {
    return enumerate(g->points, [&](const PairedPoint& p) { return r_objective(S.pair(), p, t); });
  }
  if (S.pair().euclidean()) return euclidean_gap(S, t, opts);
  if (const auto* L = std::get_if<Linear>(&S.node())) return linear_descent(S.pair(), L->M, t, opts);
  auto obj = [&](const PairedPoint& p) { return r_objective(S.pair(), p, t); };
  const Vec z = t.x + t.xstar;
  return param_search(S, obj, {z}, z, opts);
}

GapReport gap(const MonotoneOperator& S, const GapQuery& q, const GapOptions& opts) {
  if (q.dual_fuzz && q.primal_fuzz) throw std::invalid_argument("gap query: at most one fuzz set");
  if (q.dual_fuzz) return fuzzy_gap_dual(S, q.target.x, *q.dual_fuzz, opts);
  if (q.primal_fuzz) return fuzzy_gap_primal(S, *q.primal_fuzz, q.target.xstar, opts);
  return gap(S, q.target, opts);
}

std::optional<GapReport> gap_euclidean_oracle(const MonotoneOperator& S, const PairedPoint& t) {
  if (!S.pair().euclidean()) throw std::invalid_argument("gap_euclidean_oracle: pair is not Euclidean");
  S.pair().check(t.x, "target x");
  S.pair().check(t.xstar, "target x*");
  const Vec z = t.x + t.xstar;
  const auto r = resolvent(S, z);
  if (!r) return std::nullopt;
  GapReport rep;
  rep.method = GapMethod::resolvent;
  rep.witness = r->point;
  rep.value = 0.5 * (r->point.x + r->point.xstar - z).squaredNorm();
  rep.status = r->converged ? GapStatus::exact : GapStatus::upper_bound;
  rep.steps = 1;
  return rep;
}

double fuzzy_dual_objective(const DualPair& pair, const PairedPoint& sp, const Vec& w, const CompactConvexSet& Wt) {
  const Vec a = sp.x - w;
  const double na = norm(pair, a, Side::primal);
  const double d = dist_value(Wt, sp.xstar, pair.dual_norm()).first;
  // max over Wt of <a, s* - w~> = <a, s*> + support(Wt, -a).
  return 0.5 * na * na + 0.5 * d * d + a.dot(sp.xstar) + support(Wt, Vec(-a));
}

double fuzzy_primal_objective(const DualPair& pair, const PairedPoint& sp, const CompactConvexSet& W,
                              const Vec& wstar) {
  const Vec b = sp.xstar - wstar;
  const double nb = norm(pair, b, Side::dual);
  const double d = dist_value(W, sp.x, pair.primal_norm()).first;
  return 0.5 * d * d + 0.5 * nb * nb + sp.x.dot(b) + support(W, Vec(-b));
}

GapReport fuzzy_gap_dual(const MonotoneOperator& S, const Vec& w, const CompactConvexSet& Wt,
                         const GapOptions& opts) {
  S.pair().check(w, "w");
  if (Wt.dim() != S.dim()) throw DimensionError("fuzzy_gap_dual: set dimension differs from the pair");
  const auto Wd = Wt.on_side(Side::dual);
  // A singleton fuzz set is the plain gap.
  if (const auto p = Wd.singleton_point()) return gap(S, PairedPoint{w, *p}, opts);
  auto obj = [&](const PairedPoint& sp) { return fuzzy_dual_objective(S.pair(), sp, w, Wd); };
  if (const auto* g = std::get_if<FiniteGraph>(&S.node())) {
    auto rep = enumerate(g->points, obj);
    for (const auto& p : g->points) {
      if (!dist(Wd, p.xstar, S.pair().dual_norm()).exact) rep.status = GapStatus::upper_bound;
    }
    return rep;
  }
  std::vector<Vec> seeds;
  for (const auto& c : Wd.seed_points()) seeds.push_back(w + c);
  return param_search(S, obj, std::move(seeds), w + Wd.center_point(), opts);
}

GapReport fuzzy_gap_primal(const MonotoneOperator& S, const CompactConvexSet& W, const Vec& wstar,
                           const GapOptions& opts) {
  S.pair().check(wstar, "w*");
  if (W.dim() != S.dim()) throw DimensionError("fuzzy_gap_primal: set dimension differs from the pair");
  const auto Wp = W.on_side(Side::primal);
  if (const auto p = Wp.singleton_point()) return gap(S, PairedPoint{*p, wstar}, opts);
  auto obj = [&](const PairedPoint& sp) { return fuzzy_primal_objective(S.pair(), sp, Wp, wstar); };
  if (const auto* g = std::get_if<FiniteGraph>(&S.node())) {
    auto rep = enumerate(g->points, obj);
    for (const auto& p : g->points) {
      if (!dist(Wp, p.x, S.pair().primal_norm()).exact) rep.status = GapStatus::upper_bound;
    }
    return rep;
  }
  std::vector<Vec> seeds;
  for (const auto& c : Wp.seed_points()) seeds.push_back(c + wstar);
  return param_search(S, obj, std::move(seeds), Wp.center_point() + wstar, opts);
}

QuasidenseReport is_quasidense(const MonotoneOperator& S, const std::vector<PairedPoint>& probes, double eta,
                               const GapOptions& opts) {
  if (!(eta > 0)) throw std::invalid_argument("is_quasidense: eta must be positive");
  QuasidenseReport out;
  for (const auto& p : probes) {
    out.reports.push_back(gap(S, p, opts));
    const bool ok = out.reports.back().value <= eta;
    out.pass.push_back(ok);
    out.passed += ok ? 1 : 0;
  }
  out.all_pass = out.passed == static_cast<int>(probes.size());
  out.summary = std::string(out.all_pass ? "quasidense on probe set" : "not quasidense on probe set") + " (" +
                std::to_string(out.passed) + "/" + std::to_string(probes.size()) + " probes within eta)";
  return out;
}

std::vector<PairedPoint> default_probes(int dim, int count, std::uint64_t seed, double radius) {
  Rng rng(seed);
  std::vector<PairedPoint> out;
  for (int k = 0; k < count; ++k) {
    Vec x = rng.uniform_vec(dim, -radius, radius);
    Vec xs = rng.uniform_vec(dim, -radius, radius);
    out.push_back({std::move(x), std::move(xs)});
  }
  return out;
}

}  // namespace monolab

#include <doctest.h>

#include <cmath>

#include "monolab/detail/simplex.hpp"
#include "monolab/fitzpatrick.hpp"
#include "monolab/rng.hpp"
#include "unit/util.hpp"

using namespace monolab;
using testutil::s;
using testutil::v;

namespace {

DualPair R1() { return DualPair(1, NormTag::L2); }
DualPair E2() { return DualPair(2, NormTag::L2); }

OperatorPtr identity1() { return MonotoneOperator::linear(R1(), Mat::Identity(1, 1)); }

OperatorPtr half_square_subdiff() {
  return MonotoneOperator::subdifferential(R1(), ConvexFn::quadratic(Mat::Identity(1, 1), s(0)));
}

// Independent enumeration of theta on a finite graph.
double theta_enum(const std::vector<PairedPoint>& pts, const Vec& ws, const Vec& wss) {
  double best = -kInf;
  for (const auto& p : pts) best = std::max(best, p.x.dot(ws) + p.xstar.dot(wss) - p.x.dot(p.xstar));
  return best;
}

// theta* at (w**, w*) by its own LP over the pieces of theta.
double theta_conj_lp(const std::vector<PairedPoint>& pts, const Vec& wss, const Vec& ws) {
  const int n = static_cast<int>(ws.size());
  const int m = static_cast<int>(pts.size());
  Mat A = Mat::Zero(2 * n + 1, m);
  Vec b(2 * n + 1), c(m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < n; ++k) {
      A(k, i) = pts[i].x[k];
      A(n + k, i) = pts[i].xstar[k];
    }
    A(2 * n, i) = 1;
    c[i] = pts[i].x.dot(pts[i].xstar);
  }
  for (int k = 0; k < n; ++k) {
    b[k] = wss[k];
    b[n + k] = ws[k];
  }
  b[2 * n] = 1;
  const auto lp = detail::solve_lp(A, b, c);
  return lp.status == detail::LpStatus::optimal ? lp.value : kInf;
}

std::vector<PairedPoint> random_monotone_graph(Rng& rng, int n, int count) {
  // Points of the graph of a monotone affine map, so the set is monotone.
  Mat P(n, n), K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      P(i, j) = rng.uniform(-1, 1);
      K(i, j) = rng.uniform(-1, 1);
    }
  const Mat M = P * P.transpose() + 0.3 * (K - K.transpose());
  std::vector<PairedPoint> pts;
  for (int k = 0; k < count; ++k) {
    const Vec x = rng.uniform_vec(n, -2, 2);
    pts.push_back({x, M * x});
  }
  return pts;
}

}  // namespace

TEST_CASE("phi examples") {
  const auto G = MonotoneOperator::finite_graph(R1(), {{s(0), s(0)}, {s(1), s(1)}});
  auto e = phi(*G, s(1), s(1));
  CHECK(e.status == FitzStatus::exact);
  CHECK(e.value == doctest::Approx(1.0));
  CHECK(phi(*G, s(0), s(0)).value == doctest::Approx(0.0));

  e = phi(*identity1(), s(0), s(2));
  CHECK(e.status == FitzStatus::exact);
  CHECK(e.value == doctest::Approx(1.0));
}

TEST_CASE("phi of the identity against the closed form and sampled ascent") {
  const auto I = identity1();
  // Same graph, hidden behind a sum so that only sampling reaches it.
  const auto half = MonotoneOperator::linear(R1(), Mat::Constant(1, 1, 0.5));
  const auto sum = MonotoneOperator::sum(half, half);
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const double x = rng.uniform(-3, 3), xs = rng.uniform(-3, 3);
    const double closed = (x + xs) * (x + xs) / 4;
    CHECK(phi(*I, s(x), s(xs)).value == doctest::Approx(closed).epsilon(1e-12));
    const auto sampled = phi(*sum, s(x), s(xs));
    CHECK(sampled.status == FitzStatus::lower_bound);
    CHECK(sampled.value <= closed + 1e-9);
    CHECK(sampled.value == doctest::Approx(closed).epsilon(1e-6));
  }
}

TEST_CASE("phi_conj examples") {
  const auto G0 = MonotoneOperator::finite_graph(R1(), {{s(0), s(0)}});
  CHECK(phi_conj(*G0, s(0), s(0)).value == doctest::Approx(0.0));
  CHECK(std::isinf(phi_conj(*G0, s(0.1), s(0)).value));
  CHECK(std::isinf(phi_conj(*G0, s(0), s(-1)).value));

  const auto G = MonotoneOperator::finite_graph(R1(), {{s(0), s(0)}, {s(1), s(1)}});
  const auto e = phi_conj(*G, s(1), s(1));
  CHECK(e.value == doctest::Approx(1.0));
  REQUIRE(e.weights);
  CHECK((*e.weights)[1] == doctest::Approx(1.0));

  const auto Q = half_square_subdiff();
  const auto q = phi_conj(*Q, s(2), s(2));
  CHECK(q.status == FitzStatus::exact);
  CHECK(q.value == doctest::Approx(4.0));
  CHECK(std::isinf(phi_conj(*Q, s(1), s(2)).value));
}

TEST_CASE("phi_conj for subdifferentials sits above f* + f and the pairing") {
  const auto sq = CompactConvexSet::polytope(testutil::square_vertices());
  const std::vector<ConvexFn> fns = {
      ConvexFn::norm(2, 1.0, NormTag::L1),
      ConvexFn::indicator(sq),
      ConvexFn::support(sq.on_side(Side::dual)),
      ConvexFn::half_sq_norm(2, NormTag::L1),
      ConvexFn::sum(ConvexFn::norm(2, 0.5, NormTag::L2), ConvexFn::indicator(sq)),
  };
  Rng rng(8);
  for (const auto& f : fns) {
    CAPTURE(f.describe());
    const auto S = MonotoneOperator::subdifferential(E2(), f);
    for (int k = 0; k < 15; ++k) {
      const Vec ys = rng.uniform_vec(2, -1.5, 1.5), yss = rng.uniform_vec(2, -1.5, 1.5);
      const auto e = phi_conj(*S, ys, yss);
      const double fy = eval(f, yss);
      const double bound = std::isfinite(fy) ? conjugate(f, ys).lower + fy : kInf;
      CHECK(e.value >= bound - 1e-9);
      CHECK(e.value >= ys.dot(yss) - 1e-9);
      CHECK(e.upper >= e.value - 1e-9);
    }
  }
}

TEST_CASE("theta examples") {
  const auto G0 = MonotoneOperator::finite_graph(R1(), {{s(0), s(0)}});
  CHECK(theta(*G0, s(3), s(-2)).value == 0.0);
  CHECK(theta(*identity1(), s(1), s(3)).value == doctest::Approx(4.0));

  const auto sq = CompactConvexSet::polytope(testutil::square_vertices());
  for (const auto& S : {MonotoneOperator::normal_cone(E2(), sq), MonotoneOperator::linear(E2(), Mat::Identity(2, 2)),
                        MonotoneOperator::subdifferential(E2(), ConvexFn::norm(2, 1.0, NormTag::LInf))}) {
    for (const auto& p : graph_sample(*S, 30, 5).points) {
      CHECK(theta(*S, p.xstar, p.x).value == doctest::Approx(p.x.dot(p.xstar)).epsilon(1e-9));
    }
  }
}

TEST_CASE("fitz_membership examples") {
  CHECK(fitz_membership(*half_square_subdiff(), s(1), s(1)).verdict == Tri::yes);
  const auto out = fitz_membership(*identity1(), s(1), s(2));
  CHECK(out.verdict == Tri::no);
  CHECK(out.theta == doctest::Approx(9.0 / 4));
  const auto S = MonotoneOperator::subdifferential(E2(), ConvexFn::norm(2, 1.0, NormTag::L1));
  for (const auto& p : graph_sample(*S, 40, 2).points) CHECK(fitz_membership(*S, p.xstar, p.x).verdict == Tri::yes);
  CHECK_THROWS(fitz_membership(*S, v({0, 0}), v({0, 0}), 0.0));
}

TEST_CASE("phi dominates the pairing on maximal instances") {
  const auto sq = CompactConvexSet::polytope(testutil::square_vertices());
  const auto disk = CompactConvexSet::ball(v({0, 0.5}), 1.0, NormTag::L2);
  Mat A(2, 2);
  A << 1, 3, -3, 0;
  const std::vector<OperatorPtr> ops = {
      MonotoneOperator::linear(E2(), A),
      MonotoneOperator::normal_cone(E2(), sq),
      MonotoneOperator::support_subdiff(E2(), disk),
      MonotoneOperator::subdifferential(E2(), ConvexFn::norm(2, 2.0, NormTag::L1)),
      MonotoneOperator::subdifferential(E2(), ConvexFn::quadratic(Mat::Identity(2, 2), v({1, 0}))),
      MonotoneOperator::shift(MonotoneOperator::normal_cone(E2(), disk), v({1, 1}), v({-1, 2})),
      MonotoneOperator::inverse(MonotoneOperator::normal_cone(E2(), sq)),
  };
  Rng rng(17);
  for (const auto& S : ops) {
    CAPTURE(S->describe());
    for (int k = 0; k < 500; ++k) {
      const Vec x = rng.uniform_vec(2, -3, 3), xs = rng.uniform_vec(2, -3, 3);
      CHECK(phi(*S, x, xs).value >= x.dot(xs) - 1e-8);
    }
  }
}

TEST_CASE("equality set of a finite graph is its point list") {
  Rng rng(4);
  const auto pts = random_monotone_graph(rng, 2, 8);
  const auto G = MonotoneOperator::finite_graph(E2(), pts);
  std::vector<PairedPoint> probes = pts;
  for (int k = 0; k < 200; ++k) probes.push_back({rng.uniform_vec(2, -2, 2), rng.uniform_vec(2, -4, 4)});
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& p = probes[i];
    const bool eq = std::abs(phi(*G, p.x, p.xstar).value - p.x.dot(p.xstar)) <= 1e-12;
    CHECK(eq == (i < pts.size()));
  }
}

TEST_CASE("swap identity and conjugate chain on finite graphs") {
  Rng rng(12);
  for (int trial = 0; trial < 4; ++trial) {
    const auto pts = random_monotone_graph(rng, 2, 6);
    const auto G = MonotoneOperator::finite_graph(E2(), pts);
    int finite = 0;
    for (int k = 0; k < 100; ++k) {
      Vec ws, wss;
      if (k % 2 == 0) {
        // Convex combination of the pieces' gradients, so phi* is finite.
        Vec l = rng.uniform_vec(static_cast<Eigen::Index>(pts.size()), 0, 1);
        l /= l.sum();
        ws = Vec::Zero(2);
        wss = Vec::Zero(2);
        for (std::size_t i = 0; i < pts.size(); ++i) {
          ws += l[i] * pts[i].xstar;
          wss += l[i] * pts[i].x;
        }
      } else {
        ws = rng.uniform_vec(2, -3, 3);
        wss = rng.uniform_vec(2, -3, 3);
      }
      const double th = theta(*G, ws, wss).value;
      CHECK(th == theta_enum(pts, ws, wss));
      CHECK(th == phi(*G, wss, ws).value);
      const double pc = phi_conj(*G, ws, wss).value;
      const double tc = theta_conj_lp(pts, wss, ws);
      CHECK(theta_conj(*G, wss, ws).value == pc);
      if (std::isfinite(tc)) {
        ++finite;
        CHECK(tc >= pc - 1e-8);
        CHECK(pc == doctest::Approx(tc).epsilon(1e-9));
      } else {
        CHECK(std::isinf(pc));
      }
      CHECK(pc >= th - 1e-8);
    }
    CHECK(finite >= 50);
  }
}

TEST_CASE("Fitzpatrick extension of a subdifferential is the subdifferential of the conjugate") {
  const auto sq = CompactConvexSet::polytope(testutil::square_vertices());
  const auto disk = CompactConvexSet::ball(v({0.5, 0}), 1.0, NormTag::L2);
  Mat Q(2, 2);
  Q << 2, 1, 1, 1;
  const std::vector<ConvexFn> fns = {
      ConvexFn::quadratic(Q, v({1, -1})),
      ConvexFn::norm(2, 1.0, NormTag::L2),
      ConvexFn::norm(2, 1.5, NormTag::LInf),
      ConvexFn::indicator(sq),
      ConvexFn::indicator(disk),
      ConvexFn::support(disk.on_side(Side::dual)),
      ConvexFn::support(sq.on_side(Side::dual)),
  };
  Rng rng(30);
  for (const auto& f : fns) {
    CAPTURE(f.describe());
    const auto S = MonotoneOperator::subdifferential(E2(), f);
    const auto fstar = conjugate_fn(f);
    REQUIRE(fstar);
    const auto in_pts = graph_sample(*S, 50, 6, {3.0, std::nullopt}).points;
    int agree = 0, ins = 0;
    for (int k = 0; k < 100; ++k) {
      Vec ys, yss;
      if (k < 50) {
        ys = in_pts[k % in_pts.size()].xstar;
        yss = in_pts[k % in_pts.size()].x;
      } else {
        ys = rng.uniform_vec(2, -2, 2);
        yss = rng.uniform_vec(2, -2, 2);
      }
      const auto fv = fitz_membership(*S, ys, yss, 1e-7);
      const auto ref = subdiff_contains(*fstar, ys, yss, 1e-7);
      REQUIRE(fv.verdict != Tri::unknown);
      REQUIRE(ref != Tri::unknown);
      agree += fv.verdict == ref ? 1 : 0;
      ins += fv.verdict == Tri::yes ? 1 : 0;
    }
    CHECK(agree == 100);
    CHECK(ins >= 50);
  }
}

TEST_CASE("shift and inverse transform phi") {
  const auto base = MonotoneOperator::subdifferential(E2(), ConvexFn::norm(2, 1.0, NormTag::L1));
  const Vec dx = v({0.5, -1}), dxs = v({0.25, 2});
  const auto T = MonotoneOperator::shift(base, dx, dxs);
  const auto pts = graph_sample(*base, 40, 3).points;
  std::vector<PairedPoint> shifted;
  for (const auto& p : pts) shifted.push_back({p.x - dx, p.xstar - dxs});
  const auto Gs = MonotoneOperator::finite_graph(E2(), shifted);
  const auto Gb = MonotoneOperator::finite_graph(E2(), pts);
  const auto Gshift = MonotoneOperator::shift(Gb, dx, dxs);
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Vec x = rng.uniform_vec(2, -2, 2), xs = rng.uniform_vec(2, -2, 2);
    CHECK(phi(*Gshift, x, xs).value == doctest::Approx(phi(*Gs, x, xs).value).epsilon(1e-12));
    CHECK(phi(*MonotoneOperator::inverse(Gb), x, xs).value == doctest::Approx(phi(*Gb, xs, x).value));
    CHECK(phi(*T, x, xs).value >= phi(*Gs, x, xs).value - 1e-12);
    const auto pc = phi_conj(*Gshift, xs, x).value;
    const auto pd = phi_conj(*Gs, xs, x).value;
    if (std::isfinite(pd)) {
      CHECK(pc == doctest::Approx(pd).epsilon(1e-9));
    } else {
      CHECK(std::isinf(pc));
    }
  }
  CHECK_THROWS(phi_conj(*MonotoneOperator::sum(base, base), v({0, 0}), v({0, 0})));
}

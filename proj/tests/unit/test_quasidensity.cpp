#include <doctest.h>

#include <cmath>

#include "monolab/quasidensity.hpp"
#include "monolab/rng.hpp"
#include "unit/util.hpp"

using namespace monolab;
using testutil::s;
using testutil::v;

namespace {

DualPair R1() { return DualPair(1, NormTag::L2); }
DualPair E2() { return DualPair(2, NormTag::L2); }

OperatorPtr abs_subdiff() { return MonotoneOperator::subdifferential(R1(), ConvexFn::norm(1, 1.0, NormTag::L2)); }
OperatorPtr origin_graph() { return MonotoneOperator::finite_graph(R1(), {{s(0), s(0)}}); }

std::vector<OperatorPtr> euclidean_zoo() {
  const auto sq = CompactConvexSet::polytope(testutil::square_vertices());
  const auto disk = CompactConvexSet::ball(v({0.5, 0}), 1.0, NormTag::L2);
  Mat A(2, 2);
  A << 1, 2, -2, 0;
  Rng rng(9);
  std::vector<PairedPoint> pts;
  for (int k = 0; k < 12; ++k) {
    const Vec x = rng.uniform_vec(2, -2, 2);
    pts.push_back({x, A * x});
  }
  return {
      MonotoneOperator::subdifferential(E2(), ConvexFn::half_sq_norm(2)),
      MonotoneOperator::subdifferential(E2(), ConvexFn::norm(2, 1.0, NormTag::L2)),
      MonotoneOperator::subdifferential(E2(), ConvexFn::norm(2, 0.5, NormTag::L1)),
      MonotoneOperator::subdifferential(E2(), ConvexFn::indicator(sq)),
      MonotoneOperator::subdifferential(E2(), ConvexFn::support(disk.on_side(Side::dual))),
      MonotoneOperator::subdifferential(E2(), ConvexFn::sum(ConvexFn::norm(2, 1.0, NormTag::L1),
                                                            ConvexFn::indicator(disk))),
      MonotoneOperator::linear(E2(), A),
      tail_operator(2, NormTag::L2),
      MonotoneOperator::finite_graph(E2(), pts),
  };
}

}  // namespace

TEST_CASE("gap examples") {
  auto r = gap(*origin_graph(), PairedPoint{s(1), s(1)});
  CHECK(r.value == doctest::Approx(2.0));
  CHECK(r.status == GapStatus::exact);
  CHECK(r.method == GapMethod::enumeration);
  CHECK(gap(*origin_graph(), PairedPoint{s(1), s(-1)}).value == doctest::Approx(0.0));

  r = gap(*abs_subdiff(), PairedPoint{s(0), s(2)});
  CHECK(r.value == doctest::Approx(0.0));
  CHECK(r.witness.x[0] == doctest::Approx(1.0));
  CHECK(r.witness.xstar[0] == doctest::Approx(1.0));
  CHECK(r.method == GapMethod::resolvent);
}

TEST_CASE("gap_euclidean_oracle examples") {
  for (const auto& f : {ConvexFn::norm(1, 1.0, NormTag::L2), ConvexFn::half_sq_norm(1),
                        ConvexFn::indicator(CompactConvexSet::interval(-1, 2)), ConvexFn::affine(s(3))}) {
    const auto S = MonotoneOperator::subdifferential(R1(), f);
    for (double x : {-3.0, 0.0, 1.5}) {
      const auto o = gap_euclidean_oracle(*S, {s(x), s(2 - x)});
      REQUIRE(o);
      CHECK(o->value <= 1e-9);
    }
  }
  auto o = gap_euclidean_oracle(*origin_graph(), {s(1), s(1)});
  REQUIRE(o);
  CHECK(o->value == doctest::Approx(2.0));
  const auto id = MonotoneOperator::linear(R1(), Mat::Identity(1, 1));
  o = gap_euclidean_oracle(*id, {s(3), s(-3)});
  REQUIRE(o);
  CHECK(o->value == 0.0);
  CHECK(o->witness.x[0] == 0.0);
  CHECK_THROWS(gap_euclidean_oracle(*tail_operator(2), {v({0, 0}), v({1, 1})}));
}

TEST_CASE("quadratic expansion identity") {
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const Vec a = rng.uniform_vec(4, -5, 5), b = rng.uniform_vec(4, -5, 5);
    const double lhs = 0.5 * a.squaredNorm() + 0.5 * b.squaredNorm() + a.dot(b);
    CHECK(std::abs(lhs - 0.5 * (a + b).squaredNorm()) <= 1e-12 * (1 + lhs));
  }
}

TEST_CASE("gap agrees with the Euclidean oracle") {
  for (const auto& S : euclidean_zoo()) {
    CAPTURE(S->describe());
    for (const auto& p : default_probes(2, 100, 3)) {
      const auto g = gap(*S, p);
      const auto o = gap_euclidean_oracle(*S, p);
      REQUIRE(o);
      CHECK(std::abs(g.value - o->value) <= 1e-7);
      CHECK(std::abs(g.value - r_objective(S->pair(), g.witness, p)) <= 1e-12 * (1 + std::abs(g.value)));
    }
  }
}

TEST_CASE("gap vanishes at graph points") {
  for (const auto& S : euclidean_zoo()) {
    CAPTURE(S->describe());
    for (const auto& p : graph_sample(*S, 20, 8).points) {
      const auto g = gap(*S, p);
      CHECK(std::abs(g.value) <= 1e-12);
      CHECK((g.witness.x - p.x).norm() <= 1e-9);
    }
  }
  // Non-Euclidean pair: the graph point itself is among the search seeds.
  const auto S = MonotoneOperator::subdifferential(DualPair(2, NormTag::L1), ConvexFn::norm(2, 1.0, NormTag::L1));
  for (const auto& p : graph_sample(*S, 10, 2).points) {
    GapOptions o;
    o.pattern_evals = 100;
    CHECK(std::abs(gap(*S, p, o).value) <= 1e-12);
  }
  const auto G = MonotoneOperator::finite_graph(DualPair(2, NormTag::LInf), {{v({1, 2}), v({0, 3})}});
  CHECK(gap(*G, PairedPoint{v({1, 2}), v({0, 3})}).value == 0.0);
}

TEST_CASE("tail operator gaps") {
  SUBCASE("one dimension is closed form") {
    const auto r = gap(*tail_operator(1), PairedPoint{s(0), s(1)});
    CHECK(std::abs(r.value) <= 1e-9);
    CHECK(r.witness.x[0] == doctest::Approx(0.5));
  }
  SUBCASE("two dimensions against a grid") {
    const auto T = tail_operator(2);
    const Mat& M = std::get<Linear>(T->node()).M;
    const PairedPoint probe{v({0, 0}), v({1, 1})};
    GapOptions o;
    o.max_steps = 20000;
    const auto r = gap(*T, probe, o);
    CHECK(r.method == GapMethod::subgradient_descent);
    CHECK(r.status == GapStatus::upper_bound);
    CHECK(r.value == doctest::Approx(r_objective(T->pair(), r.witness, probe)).epsilon(1e-12));
    double grid = kInf;
    for (double a = -2; a <= 2; a += 0.01) {
      for (double b = -2; b <= 2; b += 0.01) {
        const Vec sv = v({a, b});
        grid = std::min(grid, r_objective(T->pair(), {sv, M * sv}, probe));
      }
    }
    CHECK(r.value <= grid + 1e-9);
    CHECK(r.value >= grid - 1e-3);
  }
}

TEST_CASE("fuzzy gap examples") {
  auto r = fuzzy_gap_dual(*abs_subdiff(), s(0), CompactConvexSet::interval(0.2, 0.4, Side::dual));
  CHECK(std::abs(r.value) <= 1e-9);
  CHECK(std::abs(r.witness.x[0]) <= 1e-9);
  CHECK(r.witness.xstar[0] >= 0.2 - 1e-9);
  CHECK(r.witness.xstar[0] <= 0.4 + 1e-9);

  r = fuzzy_gap_dual(*origin_graph(), s(1), CompactConvexSet::interval(-3, -1, Side::dual));
  CHECK(r.value == doctest::Approx(0.0));
  CHECK(r.status == GapStatus::exact);

  const auto N = MonotoneOperator::normal_cone(R1(), CompactConvexSet::interval(-1, 1));
  r = fuzzy_gap_primal(*N, CompactConvexSet::interval(-1, 1), s(5));
  CHECK(std::abs(r.value) <= 1e-9);
  CHECK(r.witness.x[0] == doctest::Approx(1.0));
  CHECK(r.witness.xstar[0] == doctest::Approx(5.0));

  r = fuzzy_gap_primal(*origin_graph(), CompactConvexSet::interval(2, 3), s(0));
  CHECK(r.value == doctest::Approx(2.0));
}

TEST_CASE("fuzzy objectives against brute force over the set") {
  Rng rng(6);
  const auto pair = R1();
  for (int k = 0; k < 100; ++k) {
    const double lo = rng.uniform(-2, 1), hi = lo + rng.uniform(0, 2);
    const auto I = CompactConvexSet::interval(lo, hi);
    const double sx = rng.uniform(-3, 3), ss = rng.uniform(-3, 3), w = rng.uniform(-3, 3);
    double mx = -kInf, dmin = kInf;
    for (int i = 0; i <= 2000; ++i) {
      const double t = lo + (hi - lo) * i / 2000.0;
      mx = std::max(mx, (sx - w) * (ss - t));
      dmin = std::min(dmin, std::abs(ss - t));
    }
    const double brute = 0.5 * (sx - w) * (sx - w) + 0.5 * dmin * dmin + mx;
    CHECK(fuzzy_dual_objective(pair, {s(sx), s(ss)}, s(w), I) == doctest::Approx(brute).epsilon(1e-5));

    mx = -kInf;
    dmin = kInf;
    for (int i = 0; i <= 2000; ++i) {
      const double t = lo + (hi - lo) * i / 2000.0;
      mx = std::max(mx, (sx - t) * (ss - w));
      dmin = std::min(dmin, std::abs(sx - t));
    }
    const double brute2 = 0.5 * dmin * dmin + 0.5 * (ss - w) * (ss - w) + mx;
    CHECK(fuzzy_primal_objective(pair, {s(sx), s(ss)}, I, s(w)) == doctest::Approx(brute2).epsilon(1e-5));
  }
}

TEST_CASE("singleton fuzz sets reduce to the plain gap") {
  Rng rng(13);
  const auto pair = E2();
  for (int k = 0; k < 100; ++k) {
    const PairedPoint sp{rng.uniform_vec(2, -3, 3), rng.uniform_vec(2, -3, 3)};
    const Vec w = rng.uniform_vec(2, -3, 3), ws = rng.uniform_vec(2, -3, 3);
    const double plain = r_objective(pair, sp, {w, ws});
    CHECK(std::abs(fuzzy_dual_objective(pair, sp, w, CompactConvexSet::singleton(ws, Side::dual)) - plain) <=
          1e-12 * (1 + std::abs(plain)));
    CHECK(std::abs(fuzzy_primal_objective(pair, sp, CompactConvexSet::singleton(w), ws) - plain) <=
          1e-12 * (1 + std::abs(plain)));
  }
  for (const auto& S : euclidean_zoo()) {
    for (const auto& p : default_probes(2, 10, 4)) {
      const double g = gap(*S, p).value;
      CHECK(std::abs(fuzzy_gap_dual(*S, p.x, CompactConvexSet::singleton(p.xstar, Side::dual)).value - g) <= 1e-12);
      CHECK(std::abs(fuzzy_gap_primal(*S, CompactConvexSet::singleton(p.x), p.xstar).value - g) <= 1e-12);
    }
  }
}

TEST_CASE("enlarging the fuzz set on a subdifferential") {
  const auto S = MonotoneOperator::subdifferential(R1(), ConvexFn::quadratic(Mat::Constant(1, 1, 2.0), s(-1)));
  Rng rng(2);
  for (int k = 0; k < 10; ++k) {
    const double w = rng.uniform(-2, 2), c = rng.uniform(-2, 2);
    double prev = kInf;
    for (double r : {0.1, 0.5, 1.0, 2.0}) {
      const auto g = fuzzy_gap_dual(*S, s(w), CompactConvexSet::interval(c - r, c + r, Side::dual));
      CHECK(g.value >= -1e-9);
      CHECK(g.value <= 1e-6);
      CHECK(g.value <= prev + 1e-9);
      prev = g.value;
      const auto h = fuzzy_gap_primal(*S, CompactConvexSet::interval(c - r, c + r), s(w));
      CHECK(h.value >= -1e-9);
      CHECK(h.value <= 1e-6);
    }
  }
}

TEST_CASE("enlarging the fuzz set can raise the gap off maximal graphs") {
  // {(0,0)} with w = 1: the set {-1} gives 0, the larger [-3, 0] gives 1/2.
  const auto G = origin_graph();
  const double small = fuzzy_gap_dual(*G, s(1), CompactConvexSet::interval(-1, -1, Side::dual)).value;
  const double large = fuzzy_gap_dual(*G, s(1), CompactConvexSet::interval(-3, 0, Side::dual)).value;
  CHECK(small == doctest::Approx(0.0));
  CHECK(large == doctest::Approx(0.5));
}

TEST_CASE("is_quasidense") {
  const auto disk = CompactConvexSet::ball(v({0, 0}), 1.0, NormTag::L2);
  for (const auto& f : {ConvexFn::half_sq_norm(2), ConvexFn::norm(2, 1.0, NormTag::LInf), ConvexFn::indicator(disk),
                        ConvexFn::support(disk.on_side(Side::dual)), ConvexFn::affine(v({1, 1}))}) {
    CAPTURE(f.describe());
    const auto S = MonotoneOperator::subdifferential(E2(), f);
    const auto rep = is_quasidense(*S, default_probes(2, 100, 5), 1e-6);
    CHECK(rep.all_pass);
    CHECK(rep.summary.rfind("quasidense on probe set", 0) == 0);
  }
  const auto rep = is_quasidense(*origin_graph(), {{s(1), s(1)}}, 1e-6);
  CHECK_FALSE(rep.all_pass);
  CHECK(rep.reports[0].value == doctest::Approx(2.0));
  CHECK(rep.summary.rfind("not quasidense on probe set", 0) == 0);
  CHECK_THROWS(is_quasidense(*origin_graph(), {}, 0.0));
}

#include <doctest.h>

#include <cmath>

#include "monolab/harness.hpp"
#include "unit/util.hpp"

using namespace monolab;
using testutil::s;

namespace {

std::string error_of(const std::string& text) {
  try {
    run_scenario_text(text);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

std::string where_of(const std::string& text) {
  try {
    run_scenario_text(text);
  } catch (const ScenarioError& e) {
    return e.where();
  }
  return "";
}

OperatorPtr abs_subdiff() { return MonotoneOperator::subdifferential(DualPair(1, NormTag::L2), ConvexFn::norm(1, 1.0, NormTag::L2)); }
OperatorPtr cone_interval(double lo, double hi) {
  return MonotoneOperator::normal_cone(DualPair(1, NormTag::L2), CompactConvexSet::interval(lo, hi));
}

}  // namespace

TEST_CASE("finite graph gap task gives one record") {
  const auto rep = run_scenario_text(R"({
    "schema": 1,
    "space": {"dim": 2, "norm": "L2"},
    "operators": {"G": {"finite_graph": [{"x": [0, 0], "xstar": [0, 0]}, {"x": [1, 0], "xstar": [1, 1]}]}},
    "tasks": [{"type": "gap", "operator": "G", "seed": 4, "points": [{"x": [1, 0], "xstar": [1, 1]}]}]
  })");
  REQUIRE(rep.records.size() == 1);
  REQUIRE(rep.tasks.size() == 1);
  CHECK(rep.tasks[0].ok);
  const auto& r = rep.records[0];
  CHECK(r.number("value") == 0.0);
  CHECK(r.text("status") == "exact");
  CHECK(r.text("quantity") == "quasidensity gap");
  CHECK(r.flag("pass"));
}

TEST_CASE("subdifferential sweep of 100 probes") {
  const auto rep = run_scenario_text(R"({
    "schema": 1,
    "space": {"dim": 2},
    "operators": {"F": {"subdiff": {"sum": [{"norm": 1}, {"half_sq_norm": {}}]}}},
    "tasks": [{"type": "gap", "operator": {"ref": "F"}, "seed": 9, "probes": 100}]
  })");
  REQUIRE(rep.records.size() == 100);
  for (const auto& r : rep.records) {
    CHECK(r.number("value") <= 1e-6);
    CHECK(r.flag("pass"));
  }
}

TEST_CASE("scenario errors name the offending key") {
  const std::string head = R"({"schema": 1, "space": {"dim": 1}, )";
  CHECK(where_of(head + R"("tasks": [{"type": "gap", "operator": {"subdiff": {"norm": 1}}, "seed": 1, "probs": 3}]})") ==
        "tasks[0].probs");
  CHECK(where_of(head + R"("tasks": [{"type": "gap", "operator": {"subdiff": {"norm": 1}}}]})") == "tasks[0].seed");
  CHECK(where_of(head + R"("operators": {"A": {"subdiff": {"quadratc": {"Q": 1}}}}, "tasks": []})") ==
        "operators.A.subdiff.quadratc");
  CHECK(where_of(head + R"("tasks": [{"type": "gap", "operator": "Nope", "seed": 1}]})") == "tasks[0].operator");
  CHECK(error_of(head + R"("tasks": [{"type": "gap", "operator": "Nope", "seed": 1}]})").find("unknown operator") !=
        std::string::npos);
  CHECK(where_of(head + R"("tasks": [{"type": "gap", "operator": {"linear": [[1, 2]]}, "seed": 1}]})") ==
        "tasks[0].operator.linear[0]");
  CHECK(where_of(head + R"("tasks": [{"type": "gap", "operator": {"normal_cone": {"interval": [2, 1]}}, "seed": 1}]})") ==
        "tasks[0].operator.normal_cone");
  CHECK(where_of(R"({"schema": 2, "space": {"dim": 1}, "tasks": []})") == "schema");
  CHECK(where_of("{\n  \"schema\": 1,\n  \"space\": {\"dim\": 1},,\n}") == "3:23");
  CHECK_THROWS_AS(run_scenario("/nonexistent/scenario.json"), ScenarioError);
}

TEST_CASE("task failures are recorded and the batch continues") {
  const auto rep = run_scenario_text(R"({
    "schema": 1,
    "space": {"dim": 1},
    "tasks": [
      {"type": "br", "mode": "point", "seed": 1, "function": {"half_sq_norm": {}}, "u": 5, "alpha": 1, "beta": 0.1},
      {"type": "gap", "operator": {"linear": 2}, "seed": 1, "points": [{"x": 0, "xstar": 1}]}
    ]
  })");
  REQUIRE(rep.tasks.size() == 2);
  CHECK_FALSE(rep.tasks[0].ok);
  CHECK(rep.tasks[0].error.find("alpha * beta") != std::string::npos);
  CHECK(rep.tasks[1].ok);
  CHECK(rep.records.size() == 1);
  CHECK_FALSE(rep.all_ok());
}

TEST_CASE("every task type runs from a scenario") {
  const auto rep = run_scenario_text(R"({
    "schema": 1,
    "space": {"dim": 1},
    "operators": {
      "abs": {"subdiff": {"norm": 1}},
      "box": {"normal_cone": {"interval": [-1, 1]}},
      "origin": {"finite_graph": [{"x": 0, "xstar": 0}]}
    },
    "tasks": [
      {"type": "fitz", "operator": "abs", "seed": 2, "points": [{"x": 1, "xstar": 1}, {"x": 1, "xstar": 0}]},
      {"type": "classify", "class": "fpv", "operator": "abs", "seed": 3, "budget": 100,
       "window": {"ball": {"center": 0, "radius": 2}}, "w": 0.5, "wstar": 1},
      {"type": "classify", "class": "ni", "operator": "origin", "seed": 3, "wstar": 1, "wstarstar": 1},
      {"type": "classify", "class": "strongmax", "side": "dual", "operator": "abs", "seed": 3,
       "set": {"interval": [0.5, 2]}, "w": 1},
      {"type": "br", "mode": "witness", "seed": 1, "function": {"norm": 1}, "x": 3, "xstar": 0},
      {"type": "br", "mode": "corollary", "seed": 1, "function": {"half_sq_norm": {}}, "beta": 0.1},
      {"type": "tail_experiment", "seed": 5, "n": [1, 2]},
      {"type": "sum_test", "seed": 6, "S": "abs", "T": "box", "probes": 10}
    ]
  })");
  CHECK(rep.all_ok());
  REQUIRE(rep.records.size() == 10);
  CHECK(rep.records[0].text("membership") == "in");
  CHECK(rep.records[1].text("membership") == "out");
  CHECK(rep.records[2].text("conclusion") == "in");
  CHECK(rep.records[3].number("value") == doctest::Approx(1.0));
  CHECK(rep.records[4].text("outcome") == "yes");
  CHECK(rep.records[5].flag("pass"));
  CHECK(rep.records[6].flag("ok"));
  CHECK(rep.records[7].number("gap_bound") == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rep.records[8].number("n") == 2.0);
  CHECK(rep.records[9].flag("pass"));
  for (const auto& r : rep.records) CHECK_FALSE(r.text("quantity").empty());
}

TEST_CASE("reports reproduce under a fixed seed") {
  const std::string text = R"({
    "schema": 1,
    "space": {"dim": 2, "norm": "L1"},
    "operators": {"T": {"tail": 2}},
    "tasks": [
      {"type": "gap", "operator": "T", "seed": 17, "probes": 5},
      {"type": "fitz", "operator": "T", "seed": 17, "probes": 3}
    ]
  })";
  const auto a = run_scenario_text(text);
  const auto b = run_scenario_text(text);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_json(true).find("elapsed_ms") != std::string::npos);
  CHECK(a.to_json().find("elapsed_ms") == std::string::npos);
}

TEST_CASE("report serialization") {
  Report rep;
  Record r;
  r.set("a", 1.5).set("b", std::vector<double>{1.0, -kInf}).set("c", std::string("x,y")).set("d", Field());
  rep.records.push_back(r);
  Record r2;
  r2.set("e", true).set("a", std::int64_t{3});
  rep.records.push_back(r2);
  rep.tasks.push_back({"gap", true, "", 2, 0.0});
  CHECK(rep.to_csv() == "a,b,c,d,e\n1.5,1;-inf,\"x,y\",,\n3,,,,true\n");
  const std::string js = rep.to_json();
  CHECK(js.find("\"-inf\"") != std::string::npos);
  CHECK(js.find("\"schema\": 1") != std::string::npos);
  CHECK(r.number("a") == 1.5);
  CHECK_THROWS_AS(r.number("zz"), std::out_of_range);
}

TEST_CASE("tail_experiment examples") {
  const auto one = tail_experiment({1}, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].error.empty());
  CHECK(std::abs(one[0].gap.value) <= 1e-9);
  CHECK(one[0].gap.witness.x[0] == doctest::Approx(0.5));

  CHECK(tail_experiment({}, 1).empty());

  const auto rows = tail_experiment({2, 4, 0}, 1);
  REQUIRE(rows.size() == 3);
  for (int i = 0; i < 2; ++i) {
    CHECK(rows[i].error.empty());
    CHECK(std::isfinite(rows[i].gap.value));
    CHECK(rows[i].gap.steps > 0);
  }
  CHECK_FALSE(rows[2].error.empty());
}

TEST_CASE("sum_test examples") {
  const auto dom = sum_test(abs_subdiff(), cone_interval(-1, 1), SumMode::domain, 50, 7, 1e-6);
  CHECK_FALSE(dom.skipped);
  REQUIRE(dom.witness);
  CHECK(std::abs((*dom.witness)[0]) < 1.0);
  CHECK(dom.probes == 50);
  CHECK(dom.pass);
  CHECK(dom.max_gap <= 1e-6);

  const auto rng = sum_test(cone_interval(-1, 1), abs_subdiff(), SumMode::range, 50, 7, 1e-3);
  CHECK_FALSE(rng.skipped);
  CHECK(rng.pass);
  CHECK(rng.max_gap <= 1e-3);

  const auto disjoint = sum_test(cone_interval(-3, -2), cone_interval(2, 3), SumMode::domain, 50, 7, 1e-6);
  CHECK(disjoint.skipped);
  CHECK(disjoint.reason == "no interior witness");
  CHECK_FALSE(disjoint.pass);

  const DualPair l1(2, NormTag::L1);
  const auto a = MonotoneOperator::subdifferential(l1, ConvexFn::norm(2, 1.0, NormTag::L1));
  const auto nonE = sum_test(a, a, SumMode::domain, 5, 7, 1e-6);
  CHECK(nonE.skipped);
  CHECK(nonE.reason == "Euclidean pair required");
}

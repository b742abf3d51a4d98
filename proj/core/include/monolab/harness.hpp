#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "monolab/operators.hpp"
#include "monolab/quasidensity.hpp"

namespace monolab {

/// Malformed or inconsistent scenario input. `where` names the offending key
/// (e.g. "tasks[2].seed") or a line:column position for syntax errors.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

using Field = std::variant<std::monostate, bool, std::int64_t, double, std::string, std::vector<double>>;

/// One flat report row; fields keep insertion order.
struct Record {
  std::vector<std::pair<std::string, Field>> fields;

  Record& set(std::string key, Field value);
  const Field* find(const std::string& key) const;
  /// Numeric field (bool and integer fields convert); throws when absent.
  double number(const std::string& key) const;
  std::string text(const std::string& key) const;
  bool flag(const std::string& key) const;
};

struct TaskOutcome {
  std::string type;
  bool ok = true;
  std::string error;  ///< set when the task threw; the batch continues
  int records = 0;
  double elapsed_ms = 0.0;
};

struct Report {
  std::vector<Record> records;
  std::vector<TaskOutcome> tasks;

  /// Canonical JSON. Timings are reported only on request so that reruns
  /// compare byte for byte.
  std::string to_json(bool with_timings = false) const;
  /// Flat view: union of record keys as columns, vectors joined by ';'.
  std::string to_csv() const;
  bool all_ok() const;
};

/// Parses and runs a scenario document (schema 1). Throws ScenarioError for
/// syntax errors, unknown keys or operator references, and missing seeds.
Report run_scenario_text(const std::string& text);
Report run_scenario(const std::string& path);

struct TailRow {
  int n = 0;
  GapReport gap;
  std::string error;
};

/// l1/linf gap upper bounds of tail_operator(n) at (x, x*) per n. The default
/// probe is x = 0, x* = (1, ..., 1).
std::vector<TailRow> tail_experiment(const std::vector<int>& ns, std::uint64_t seed,
                                     const std::optional<PairedPoint>& probe = std::nullopt,
                                     const GapOptions& opts = {});

enum class SumMode { domain, range };

struct SumTestResult {
  bool skipped = false;
  std::string reason;
  std::optional<Vec> witness;  ///< in D(S) and int D(T), or R(S) and int R(T)
  int probes = 0;
  int passed = 0;
  double max_gap = 0.0;
  bool pass = false;
};

/// Gap sweep of S + T (domain mode) or the parallel sum (range mode) after
/// finding an explicit interior witness; skipped when none is found or the
/// pair is not Euclidean.
SumTestResult sum_test(const OperatorPtr& S, const OperatorPtr& T, SumMode mode, int probes, std::uint64_t seed,
                       double eta, int budget = 200);

}  // namespace monolab

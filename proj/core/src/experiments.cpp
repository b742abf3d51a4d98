#include <algorithm>
#include <stdexcept>

#include "monolab/harness.hpp"

namespace monolab {

std::vector<TailRow> tail_experiment(const std::vector<int>& ns, std::uint64_t seed,
                                     const std::optional<PairedPoint>& probe, const GapOptions& opts) {
  std::vector<TailRow> rows;
  for (int n : ns) {
    TailRow row;
    row.n = n;
    try {
      if (n < 1) throw std::invalid_argument("n must be at least 1");
      const auto T = tail_operator(n);
      PairedPoint target{Vec::Zero(n), Vec::Ones(n)};
      if (probe) {
        if (probe->x.size() != n || probe->xstar.size() != n) throw DimensionError("probe length differs from n");
        target = *probe;
      }
      GapOptions o = opts;
      o.seed = seed;
      row.gap = gap(*T, target, o);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SumTestResult sum_test(const OperatorPtr& S, const OperatorPtr& T, SumMode mode, int probes, std::uint64_t seed,
                       double eta, int budget) {
  if (!S || !T) throw std::invalid_argument("sum_test needs two operators");
  if (S->pair() != T->pair()) throw std::invalid_argument("sum_test operators live on different pairs");
  if (probes < 0) throw std::invalid_argument("probes must be nonnegative");

  SumTestResult out;
  if (!S->pair().euclidean()) {
    out.skipped = true;
    out.reason = "Euclidean pair required";
    return out;
  }

  // D(S) meets int D(T) (domain mode) or R(S) meets int R(T) (range mode).
  const auto sample = graph_sample(*S, budget, seed);
  for (const auto& p : sample.points) {
    const Tri hit = mode == SumMode::domain ? domain_interior_contains(*T, p.x) : range_interior_contains(*T, p.xstar);
    if (hit == Tri::yes) {
      out.witness = mode == SumMode::domain ? p.x : p.xstar;
      break;
    }
  }
  if (!out.witness) {
    out.skipped = true;
    out.reason = "no interior witness";
    return out;
  }

  const auto op = mode == SumMode::domain ? MonotoneOperator::sum(S, T) : MonotoneOperator::parallel_sum(S, T);
  GapOptions opts;
  opts.seed = seed;
  out.probes = probes;
  for (const auto& probe : default_probes(S->dim(), probes, seed)) {
    const double g = gap(*op, probe, opts).value;
    out.max_gap = std::max(out.max_gap, g);
    if (g <= eta) ++out.passed;
  }
  out.pass = out.passed == out.probes;
  return out;
}

}  // namespace monolab

#pragma once

#include <functional>

#include "monolab/spaces.hpp"

namespace monolab::detail {

struct PatternResult {
  Vec x;
  double value = kInf;
  int evals = 0;
};

/// Compass search minimizing f from x with initial step h. The step doubles
/// after a successful sweep and halves otherwise. Stops early once the value
/// drops to stop_at.
PatternResult pattern_search(const std::function<double(const Vec&)>& f, Vec x, double h, int max_evals,
                             double stop_at = -kInf);

}  // namespace monolab::detail

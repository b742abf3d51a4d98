#pragma once

#include <initializer_list>
#include <vector>

#include "monolab/spaces.hpp"

namespace testutil {

inline monolab::Vec v(std::initializer_list<double> xs) {
  monolab::Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

inline monolab::Vec s(double x) { return monolab::Vec::Constant(1, x); }

inline std::vector<monolab::Vec> square_vertices() {
  return {v({-1, -1}), v({-1, 1}), v({1, -1}), v({1, 1})};
}

}  // namespace testutil

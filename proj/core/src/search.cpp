#include "monolab/detail/search.hpp"

namespace monolab::detail {

PatternResult pattern_search(const std::function<double(const Vec&)>& f, Vec x, double h, int max_evals,
                             double stop_at) {
  PatternResult out;
  out.value = f(x);
  out.evals = 1;
  while (out.evals < max_evals && h > 1e-12 && out.value > stop_at) {
    bool improved = false;
    for (Eigen::Index i = 0; i < x.size() && out.evals < max_evals && out.value > stop_at; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vec xt = x;
        xt[i] += sgn * h;
        const double v = f(xt);
        ++out.evals;
        if (v < out.value) {
          out.value = v;
          x = std::move(xt);
          improved = true;
          break;
        }
      }
    }
    h = improved ? h * 2.0 : h * 0.5;
  }
  out.x = std::move(x);
  return out;
}

}  // namespace monolab::detail

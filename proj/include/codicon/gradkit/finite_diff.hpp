#pragma once

#include <functional>
#include <span>
#include <vector>

#include "codicon/gradkit/mlp.hpp"

namespace codicon {

// Central differences, one coordinate at a time. Test oracle only.
inline FlatGrad finite_diff_grad(const std::function<double(std::span<const double>)>& fn,
                                 std::span<const double> params, double step) {
  std::vector<double> x(params.begin(), params.end());
  FlatGrad grad(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double saved = x[k];
    x[k] = saved + step;
    const double up = fn(x);
    x[k] = saved - step;
    const double down = fn(x);
    x[k] = saved;
    grad[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace codicon

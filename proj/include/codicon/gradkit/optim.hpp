#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "codicon/gradkit/mlp.hpp"

namespace codicon {

enum class Direction { kAscent, kDescent };

// Outcome of a parameter update. A rejected update leaves params untouched.
struct UpdateStatus {
  bool applied = true;
  std::string diagnostic;

  explicit operator bool() const { return applied; }
};

// params_k +/- lr * grad_k. Rejects the whole step if any grad entry is
// non-finite.
UpdateStatus sgd_step(std::span<double> params, const FlatGrad& grad, double lr, Direction dir);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam descent step.
UpdateStatus adam_step(std::span<double> params, AdamState& state, const FlatGrad& grad, double lr);

}  // namespace codicon

#include "codicon/gradkit/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "codicon/simd/kernels.hpp"

namespace codicon {
namespace {

UpdateStatus reject_non_finite(const FlatGrad& grad) {
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (!std::isfinite(grad[k])) {
      return {false, "non-finite gradient entry at index " + std::to_string(k) + " (" +
                         std::to_string(grad[k]) + "), update skipped"};
    }
  }
  return {};
}

}  // namespace

UpdateStatus sgd_step(std::span<double> params, const FlatGrad& grad, double lr, Direction dir) {
  if (params.size() != grad.size()) throw std::invalid_argument("sgd_step: length mismatch");
  if (UpdateStatus s = reject_non_finite(grad); !s) return s;
  const double signed_lr = dir == Direction::kAscent ? lr : -lr;
  if (signed_lr != 0.0) simd::axpy(signed_lr, grad.values.data(), params.data(), params.size());
  return {};
}

UpdateStatus adam_step(std::span<double> params, AdamState& state, const FlatGrad& grad, double lr) {
  if (params.size() != grad.size() || state.m.size() != grad.size() || state.v.size() != grad.size()) {
    throw std::invalid_argument("adam_step: length mismatch");
  }
  if (UpdateStatus s = reject_non_finite(grad); !s) return s;
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grad[k];
    state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g;
    state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[k] / c1;
    const double v_hat = state.v[k] / c2;
    params[k] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
  return {};
}

}  // namespace codicon

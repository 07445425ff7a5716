#include <arm_neon.h>

#include "codicon/simd/kernels.hpp"

namespace codicon::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + k), vld1q_f64(b + k));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + k + 2), vld1q_f64(b + k + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    vst1q_f64(y + k, vfmaq_f64(vld1q_f64(y + k), va, vld1q_f64(x + k)));
  }
  for (; k < n; ++k) y[k] += alpha * x[k];
}

void gemv_neon(const double* w, const double* x, const double* bias, double* y,
               std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double acc = dot_neon(w + r * cols, x, cols);
    y[r] = bias ? acc + bias[r] : acc;
  }
}

void ger_neon(const double* u, const double* v, double* a, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (u[r] != 0.0) axpy_neon(u[r], v, a + r * cols, cols);
  }
}

void gemv_t_neon(const double* w, const double* u, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (u[r] != 0.0) axpy_neon(u[r], w + r * cols, y, cols);
  }
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable table{"neon", dot_neon, axpy_neon, gemv_neon, ger_neon, gemv_t_neon};
  return &table;
}

}  // namespace codicon::simd

#pragma once
// Dense double-precision kernels backing the MLP inner loops.
//
// Every kernel has a scalar reference implementation and, where the build
// target allows it, an AVX2/FMA (x86-64) or NEON (aarch64) variant. The active
// table is picked once per process from the CPU feature set; set
// CODICON_SIMD=scalar to force the reference path.

#include <cstddef>
#include <string_view>

namespace codicon::simd {

struct KernelTable {
  std::string_view name;
  // sum_k a[k] * b[k]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + bias, W row-major rows x cols; bias may be null
  void (*gemv)(const double* w, const double* x, const double* bias, double* y,
               std::size_t rows, std::size_t cols);
  // A += u v^T, A row-major rows x cols; rows with u[r] == 0 are skipped
  void (*ger)(const double* u, const double* v, double* a, std::size_t rows, std::size_t cols);
  // y += W^T u, W row-major rows x cols; rows with u[r] == 0 are skipped
  void (*gemv_t)(const double* w, const double* u, double* y, std::size_t rows, std::size_t cols);
};

const KernelTable& scalar_kernels();

// Null when the variant is not compiled in or the CPU lacks the features.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Table selected for this process.
const KernelTable& active_kernels();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active_kernels().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active_kernels().axpy(alpha, x, y, n);
}
inline void gemv(const double* w, const double* x, const double* bias, double* y,
                 std::size_t rows, std::size_t cols) {
  active_kernels().gemv(w, x, bias, y, rows, cols);
}
inline void ger(const double* u, const double* v, double* a, std::size_t rows, std::size_t cols) {
  active_kernels().ger(u, v, a, rows, cols);
}
inline void gemv_t(const double* w, const double* u, double* y, std::size_t rows, std::size_t cols) {
  active_kernels().gemv_t(w, u, y, rows, cols);
}

}  // namespace codicon::simd

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "codicon/simd/kernels.hpp"

namespace codicon::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  for (; k + 4 <= n; k += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vy = _mm256_loadu_pd(y + k);
    _mm256_storeu_pd(y + k, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + k), vy));
  }
  for (; k < n; ++k) y[k] += alpha * x[k];
}

// Four rows at a time so each load of x feeds four accumulators.
void gemv_avx2(const double* w, const double* x, const double* bias, double* y,
               std::size_t rows, std::size_t cols) {
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* w0 = w + r * cols;
    const double* w1 = w0 + cols;
    const double* w2 = w1 + cols;
    const double* w3 = w2 + cols;
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= cols; k += 4) {
      const __m256d vx = _mm256_loadu_pd(x + k);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + k), vx, a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + k), vx, a1);
      a2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + k), vx, a2);
      a3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + k), vx, a3);
    }
    double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
    for (; k < cols; ++k) {
      s0 += w0[k] * x[k];
      s1 += w1[k] * x[k];
      s2 += w2[k] * x[k];
      s3 += w3[k] * x[k];
    }
    if (bias) {
      s0 += bias[r];
      s1 += bias[r + 1];
      s2 += bias[r + 2];
      s3 += bias[r + 3];
    }
    y[r] = s0;
    y[r + 1] = s1;
    y[r + 2] = s2;
    y[r + 3] = s3;
  }
  for (; r < rows; ++r) {
    const double acc = dot_avx2(w + r * cols, x, cols);
    y[r] = bias ? acc + bias[r] : acc;
  }
}

void ger_avx2(const double* u, const double* v, double* a, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (u[r] != 0.0) axpy_avx2(u[r], v, a + r * cols, cols);
  }
}

// Up to four nonzero rows per pass so each load/store of y is shared.
void gemv_t_avx2(const double* w, const double* u, double* y, std::size_t rows, std::size_t cols) {
  std::size_t picked[4];
  std::size_t r = 0;
  while (r < rows) {
    std::size_t m = 0;
    for (; r < rows && m < 4; ++r) {
      if (u[r] != 0.0) picked[m++] = r;
    }
    if (m < 4) {
      for (std::size_t j = 0; j < m; ++j) axpy_avx2(u[picked[j]], w + picked[j] * cols, y, cols);
      break;
    }
    const double* w0 = w + picked[0] * cols;
    const double* w1 = w + picked[1] * cols;
    const double* w2 = w + picked[2] * cols;
    const double* w3 = w + picked[3] * cols;
    const __m256d u0 = _mm256_set1_pd(u[picked[0]]), u1 = _mm256_set1_pd(u[picked[1]]);
    const __m256d u2 = _mm256_set1_pd(u[picked[2]]), u3 = _mm256_set1_pd(u[picked[3]]);
    std::size_t k = 0;
    for (; k + 4 <= cols; k += 4) {
      __m256d vy = _mm256_loadu_pd(y + k);
      vy = _mm256_fmadd_pd(u0, _mm256_loadu_pd(w0 + k), vy);
      vy = _mm256_fmadd_pd(u1, _mm256_loadu_pd(w1 + k), vy);
      vy = _mm256_fmadd_pd(u2, _mm256_loadu_pd(w2 + k), vy);
      vy = _mm256_fmadd_pd(u3, _mm256_loadu_pd(w3 + k), vy);
      _mm256_storeu_pd(y + k, vy);
    }
    for (; k < cols; ++k) {
      y[k] += u[picked[0]] * w0[k];
      y[k] += u[picked[1]] * w1[k];
      y[k] += u[picked[2]] * w2[k];
      y[k] += u[picked[3]] * w3[k];
    }
  }
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2", dot_avx2, axpy_avx2, gemv_avx2, ger_avx2, gemv_t_avx2};
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &table : nullptr;
}

}  // namespace codicon::simd

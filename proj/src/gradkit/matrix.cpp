#include "codicon/gradkit/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "codicon/simd/kernels.hpp"

namespace codicon {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols) throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> y(m.rows);
  simd::gemv(m.data.data(), x.data(), nullptr, y.data(), m.rows, m.cols);
  return y;
}

}  // namespace codicon

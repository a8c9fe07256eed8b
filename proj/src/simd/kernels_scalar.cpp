#include "physnet/simd.hpp"

#include <cmath>

namespace physnet::simd::detail {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby_scalar(const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

void mul_scalar(const double* x, const double* y, double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void spmv_scalar(const CsrView& m, const double* x, double* y) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    double s = 0.0;
    for (std::int32_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) s += m.values[p] * x[m.col_idx[p]];
    y[r] = s;
  }
}

void row_sq_norms_scalar(const double* m, std::size_t rows, std::size_t cols, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += row[j] * row[j];
    out[r] = s;
  }
}

void row_abs_sums_scalar(const double* m, std::size_t rows, std::size_t cols, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += std::fabs(row[j]);
    out[r] = s;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      Isa::Scalar, dot_scalar, axpy_scalar, xpby_scalar, mul_scalar, spmv_scalar, row_sq_norms_scalar,
      row_abs_sums_scalar,
  };
  return table;
}

}  // namespace physnet::simd::detail

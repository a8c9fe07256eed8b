// aarch64 only; NEON is baseline there, so no runtime probe is needed.
#include "physnet/simd.hpp"

#include <arm_neon.h>

#include <cmath>

namespace physnet::simd::detail {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void xpby_neon(const double* x, double b, double* y, std::size_t n) {
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(x + i), vb, vld1q_f64(y + i)));
  for (; i < n; ++i) y[i] = x[i] + b * y[i];
}

void mul_neon(const double* x, const double* y, double* z, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(z + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) z[i] = x[i] * y[i];
}

void spmv_neon(const CsrView& m, const double* x, double* y) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::int32_t p = m.row_ptr[r];
    const std::int32_t end = m.row_ptr[r + 1];
    float64x2_t acc = vdupq_n_f64(0.0);
    for (; p + 2 <= end; p += 2) {
      const double gathered[2] = {x[m.col_idx[p]], x[m.col_idx[p + 1]]};
      acc = vfmaq_f64(acc, vld1q_f64(m.values + p), vld1q_f64(gathered));
    }
    double s = vaddvq_f64(acc);
    for (; p < end; ++p) s += m.values[p] * x[m.col_idx[p]];
    y[r] = s;
  }
}

void row_sq_norms_neon(const double* m, std::size_t rows, std::size_t cols, double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_neon(m + r * cols, m + r * cols, cols);
}

void row_abs_sums_neon(const double* m, std::size_t rows, std::size_t cols, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 2 <= cols; j += 2) acc = vaddq_f64(acc, vabsq_f64(vld1q_f64(row + j)));
    double s = vaddvq_f64(acc);
    for (; j < cols; ++j) s += std::fabs(row[j]);
    out[r] = s;
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{
      Isa::Neon, dot_neon, axpy_neon, xpby_neon, mul_neon, spmv_neon, row_sq_norms_neon, row_abs_sums_neon,
  };
  return table;
}

}  // namespace physnet::simd::detail

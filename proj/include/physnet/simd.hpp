#pragma once
// Data-parallel inner loops used by the electrical solver and the dynamics.
//
// Every kernel has a portable scalar reference implementation. Vector
// variants (AVX2+FMA on x86-64, NEON on aarch64) are compiled into separate
// translation units and picked at runtime from CPU feature detection. The
// environment variable PHYSNET_SIMD=scalar|avx2|neon overrides the choice.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace physnet::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

// Compressed sparse row view. Column indices and row pointers use int32.
struct CsrView {
  std::size_t rows = 0;
  const std::int32_t* row_ptr = nullptr;
  const std::int32_t* col_idx = nullptr;
  const double* values = nullptr;
};

struct KernelTable {
  Isa isa = Isa::Scalar;

  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n) = nullptr;
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n) = nullptr;
  // y = x + b * y
  void (*xpby)(const double* x, double b, double* y, std::size_t n) = nullptr;
  // z = x .* y
  void (*mul)(const double* x, const double* y, double* z, std::size_t n) = nullptr;
  // y = M * x
  void (*spmv)(const CsrView& m, const double* x, double* y) = nullptr;
  // out[r] = sum_j M(r, j)^2 for a row-major rows x cols matrix
  void (*row_sq_norms)(const double* m, std::size_t rows, std::size_t cols, double* out) = nullptr;
  // out[r] = sum_j |M(r, j)|
  void (*row_abs_sums)(const double* m, std::size_t rows, std::size_t cols, double* out) = nullptr;
};

// Best table for this CPU (honours PHYSNET_SIMD). Resolved once.
const KernelTable& kernels();

// Table for a specific ISA, or nullptr when that variant is not compiled in
// or not supported by the running CPU.
const KernelTable* kernel_table(Isa isa);

// ISAs usable on this machine, scalar first.
std::vector<Isa> available_isas();

namespace detail {
const KernelTable& scalar_table();
#if defined(PHYSNET_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(PHYSNET_HAVE_NEON)
const KernelTable& neon_table();
#endif
}  // namespace detail

// Convenience wrappers over the active table.
inline double dot(std::span<const double> x, std::span<const double> y) {
  return kernels().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  kernels().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace physnet::simd

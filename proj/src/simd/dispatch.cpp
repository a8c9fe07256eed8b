#include "physnet/simd.hpp"

#include <cstdlib>
#include <string>

namespace physnet::simd {
namespace {

bool cpu_has_avx2() {
#if defined(PHYSNET_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& resolve() {
  const char* env = std::getenv("PHYSNET_SIMD");
  if (env != nullptr) {
    const std::string want(env);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (want == isa_name(isa)) {
        if (const KernelTable* t = kernel_table(isa)) return *t;
      }
    }
  }
  const auto isas = available_isas();
  return *kernel_table(isas.back());
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable* kernel_table(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &detail::scalar_table();
    case Isa::Avx2:
#if defined(PHYSNET_HAVE_AVX2)
      if (cpu_has_avx2()) return &detail::avx2_table();
#endif
      return nullptr;
    case Isa::Neon:
#if defined(PHYSNET_HAVE_NEON)
      return &detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::Scalar};
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (kernel_table(isa) != nullptr) out.push_back(isa);
  }
  return out;
}

const KernelTable& kernels() {
  static const KernelTable& table = resolve();
  return table;
}

}  // namespace physnet::simd

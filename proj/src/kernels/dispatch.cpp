#include "isomat/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace isomat::kernels {

#if ISOMAT_HAVE_AVX2_TU
const KernelTable& avx2_table_impl();
#endif

const KernelTable* avx2_table() {
#if ISOMAT_HAVE_AVX2_TU
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("ISOMAT_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar_table();
    const KernelTable* fast = avx2_table();
    return fast != nullptr ? fast : &scalar_table();
  }();
  return *chosen;
}

}  // namespace isomat::kernels

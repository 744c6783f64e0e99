#pragma once

#include <cstddef>
#include <string_view>

// Batch numeric kernels behind the HCIZ quadrature, Haar Monte Carlo and the
// Rician fitter.  Every kernel has a portable scalar reference; an AVX2/FMA
// variant is selected at runtime when the CPU supports it.  Setting the
// environment variable ISOMAT_SIMD=scalar forces the reference path.
namespace isomat::kernels {

struct KernelTable {
  std::string_view name;

  // out[k] = sum_j coef[j] * cols[j][k],  j < ncols, k < n
  void (*combine_columns)(const double* const* cols, int ncols, std::size_t n,
                          const double* coef, double* out);

  // sum_k w[k] * exp(e[k] - shift); w == nullptr means unit weights
  double (*sum_exp_shifted)(const double* e, const double* w, std::size_t n, double shift);

  // x[k] = exp(x[k])
  void (*exp_inplace)(double* x, std::size_t n);

  // max_k e[k]; -inf for n == 0
  double (*max_value)(const double* e, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the variant was not built or the CPU lacks the instructions.
const KernelTable* avx2_table();
// The table used by the library: AVX2 if available and not overridden.
const KernelTable& active();

}  // namespace isomat::kernels

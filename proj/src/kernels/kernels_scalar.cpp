#include "isomat/kernels.hpp"

#include <cmath>
#include <limits>

namespace isomat::kernels {

namespace {

void combine_columns_scalar(const double* const* cols, int ncols, std::size_t n,
                            const double* coef, double* out) {
  for (std::size_t k = 0; k < n; ++k) out[k] = 0.0;
  for (int j = 0; j < ncols; ++j) {
    const double c = coef[j];
    const double* col = cols[j];
    for (std::size_t k = 0; k < n; ++k) out[k] += c * col[k];
  }
}

double sum_exp_shifted_scalar(const double* e, const double* w, std::size_t n, double shift) {
  double acc = 0.0;
  if (w == nullptr) {
    for (std::size_t k = 0; k < n; ++k) acc += std::exp(e[k] - shift);
  } else {
    for (std::size_t k = 0; k < n; ++k) acc += w[k] * std::exp(e[k] - shift);
  }
  return acc;
}

void exp_inplace_scalar(double* x, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) x[k] = std::exp(x[k]);
}

double max_value_scalar(const double* e, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) m = e[k] > m ? e[k] : m;
  return m;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", combine_columns_scalar, sum_exp_shifted_scalar,
                                 exp_inplace_scalar, max_value_scalar};
  return table;
}

}  // namespace isomat::kernels

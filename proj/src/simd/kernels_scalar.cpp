#include "hiqa/simd/kernels.hpp"

namespace hiqa::simd {
namespace {

double dot_scalar(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

void dot_rows_scalar(const float* rows, std::size_t n_rows, std::size_t dim, const float* q, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_scalar(rows + r * dim, q, dim);
}

double squared_norm_scalar(const float* a, std::size_t n) { return dot_scalar(a, a, n); }

constexpr Kernels kScalar{Isa::scalar, &dot_scalar, &dot_rows_scalar, &squared_norm_scalar};

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

}  // namespace hiqa::simd

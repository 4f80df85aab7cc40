#pragma once

// Dense float kernels used by the vector route and cohesion analytics.
//
// Inputs are float32; products and sums are accumulated in double, so the
// variants differ from the scalar reference only in summation order.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace hiqa::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

struct Kernels {
  Isa isa;
  double (*dot)(const float* a, const float* b, std::size_t n);
  // out[r] = dot(rows + r * dim, q, dim) for r in [0, n_rows)
  void (*dot_rows)(const float* rows, std::size_t n_rows, std::size_t dim, const float* q, double* out);
  double (*squared_norm)(const float* a, std::size_t n);
};

const Kernels& scalar_kernels();
/// nullptr when the variant was not compiled in.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

/// Compiled in and supported by the running CPU.
bool is_available(Isa isa);
std::vector<Isa> available_isas();

/// Kernels in use. The best available variant is chosen on first use unless
/// the HIQA_SIMD environment variable names one ("scalar", "avx2", "neon").
const Kernels& active();

/// Throws hiqa::InvalidParameter if the variant is unavailable.
void select(Isa isa);

double dot(std::span<const float> a, std::span<const float> b);
double norm(std::span<const float> a);
void dot_rows(std::span<const float> rows, std::size_t dim, std::span<const float> q, std::span<double> out);

}  // namespace hiqa::simd

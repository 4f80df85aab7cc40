#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "hiqa/error.hpp"
#include "hiqa/simd/kernels.hpp"

namespace hiqa::simd {

namespace detail {
#ifdef HIQA_HAVE_AVX2
const Kernels* avx2_table();
#endif
#ifdef HIQA_HAVE_NEON
const Kernels* neon_table();
#endif
}  // namespace detail

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "scalar";
}

const Kernels* avx2_kernels() {
#ifdef HIQA_HAVE_AVX2
  return detail::avx2_table();
#else
  return nullptr;
#endif
}

const Kernels* neon_kernels() {
#ifdef HIQA_HAVE_NEON
  return detail::neon_table();
#else
  return nullptr;
#endif
}

bool is_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(HIQA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#ifdef HIQA_HAVE_NEON
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (is_available(isa)) out.push_back(isa);
  }
  return out;
}

namespace {

const Kernels* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &scalar_kernels();
    case Isa::avx2:
      return avx2_kernels();
    case Isa::neon:
      return neon_kernels();
  }
  return nullptr;
}

const Kernels* choose_default() {
  if (const char* env = std::getenv("HIQA_SIMD")) {
    const std::string want(env);
    for (Isa isa : available_isas()) {
      if (to_string(isa) == want) return table_for(isa);
    }
  }
  if (is_available(Isa::avx2)) return avx2_kernels();
  if (is_available(Isa::neon)) return neon_kernels();
  return &scalar_kernels();
}

std::atomic<const Kernels*> g_active{nullptr};

}  // namespace

const Kernels& active() {
  const Kernels* k = g_active.load(std::memory_order_acquire);
  if (!k) {
    const Kernels* chosen = choose_default();
    g_active.compare_exchange_strong(k, chosen, std::memory_order_acq_rel);
    k = g_active.load(std::memory_order_acquire);
  }
  return *k;
}

void select(Isa isa) {
  if (!is_available(isa)) throw InvalidParameter("SIMD variant '" + std::string(to_string(isa)) + "' is not available");
  g_active.store(table_for(isa), std::memory_order_release);
}

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw InvalidParameter("dot: length mismatch");
  return active().dot(a.data(), b.data(), a.size());
}

double norm(std::span<const float> a) { return std::sqrt(active().squared_norm(a.data(), a.size())); }

void dot_rows(std::span<const float> rows, std::size_t dim, std::span<const float> q, std::span<double> out) {
  if (q.size() != dim || rows.size() != dim * out.size()) throw InvalidParameter("dot_rows: shape mismatch");
  active().dot_rows(rows.data(), out.size(), dim, q.data(), out.data());
}

}  // namespace hiqa::simd

#include <doctest.h>

#include <cmath>
#include <random>

#include "hiqa/error.hpp"
#include "hiqa/simd/kernels.hpp"

using namespace hiqa;

namespace {

std::vector<float> random_floats(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double naive_dot(const std::vector<float>& a, const std::vector<float>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

struct IsaGuard {
  simd::Isa saved = simd::active().isa;
  ~IsaGuard() { simd::select(saved); }
};

}  // namespace

TEST_CASE("scalar kernels agree with a long double reference") {
  std::mt19937_64 rng(3);
  const auto& k = simd::scalar_kernels();
  for (std::size_t n : {0u, 1u, 3u, 8u, 15u, 16u, 17u, 255u, 256u, 1001u}) {
    const auto a = random_floats(rng, n);
    const auto b = random_floats(rng, n);
    const double ref = naive_dot(a, b);
    CHECK(k.dot(a.data(), b.data(), n) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(k.squared_norm(a.data(), n) == doctest::Approx(naive_dot(a, a)).epsilon(1e-12));
  }
}

TEST_CASE("every available variant matches the scalar reference") {
  std::mt19937_64 rng(5);
  const auto& ref = simd::scalar_kernels();
  for (const auto isa : simd::available_isas()) {
    const simd::Kernels* k = isa == simd::Isa::avx2   ? simd::avx2_kernels()
                             : isa == simd::Isa::neon ? simd::neon_kernels()
                                                      : &simd::scalar_kernels();
    REQUIRE(k != nullptr);
    CAPTURE(simd::to_string(isa));
    for (std::size_t n : {0u, 1u, 7u, 16u, 31u, 64u, 257u, 1536u}) {
      const auto a = random_floats(rng, n);
      const auto b = random_floats(rng, n);
      const double expect = ref.dot(a.data(), b.data(), n);
      const double scale = std::sqrt(ref.squared_norm(a.data(), n) * ref.squared_norm(b.data(), n)) + 1e-300;
      CHECK(std::abs(k->dot(a.data(), b.data(), n) - expect) <= 1e-12 * scale);
      CHECK(k->squared_norm(a.data(), n) == doctest::Approx(ref.squared_norm(a.data(), n)).epsilon(1e-12));

      const std::size_t rows = 5;
      const auto m = random_floats(rng, rows * n);
      std::vector<double> got(rows), want(rows);
      k->dot_rows(m.data(), rows, n, a.data(), got.data());
      ref.dot_rows(m.data(), rows, n, a.data(), want.data());
      for (std::size_t r = 0; r < rows; ++r) {
        const double row_scale =
            std::sqrt(ref.squared_norm(m.data() + r * n, n) * ref.squared_norm(a.data(), n)) + 1e-300;
        CHECK(std::abs(got[r] - want[r]) <= 1e-12 * row_scale);
      }
    }
  }
}

TEST_CASE("selection and fallback") {
  IsaGuard guard;
  CHECK(simd::is_available(simd::Isa::scalar));
  simd::select(simd::Isa::scalar);
  CHECK(simd::active().isa == simd::Isa::scalar);
  for (const auto isa : {simd::Isa::avx2, simd::Isa::neon}) {
    if (simd::is_available(isa)) {
      simd::select(isa);
      CHECK(simd::active().isa == isa);
    } else {
      CHECK_THROWS_AS(simd::select(isa), InvalidParameter);
    }
  }
}

TEST_CASE("span helpers validate shapes") {
  const std::vector<float> a{3, 4}, b{1, 0, 0};
  CHECK(simd::norm(a) == doctest::Approx(5.0));
  CHECK_THROWS_AS(simd::dot(a, b), InvalidParameter);
  std::vector<double> out(2);
  const std::vector<float> rows{1, 0, 0, 1};
  simd::dot_rows(rows, 2, a, out);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == 4.0);
  std::vector<double> short_out(1);
  CHECK_THROWS_AS(simd::dot_rows(rows, 2, a, short_out), InvalidParameter);
}

#include <random>
#include <vector>

#include "doctest.h"
#include "lck/simd/kernels.hpp"

namespace simd = lck::simd;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("dispatch reports a known isa") {
  const auto isa = simd::active_isa();
  CHECK((isa == simd::Isa::Scalar || isa == simd::Isa::Avx2));
  if (!simd::avx2_supported()) CHECK(isa == simd::Isa::Scalar);
}

TEST_CASE("scalar kernels match plain loops") {
  std::vector<double> x{1, -2, 3}, y{4, 5, -6};
  simd::scalar::axpy(2.0, x, y);
  CHECK(y == std::vector<double>{6, 1, 0});
  CHECK(simd::scalar::dot(x, x) == 14.0);
  CHECK(simd::scalar::max_abs(x) == 3.0);
  CHECK(simd::scalar::max_abs_diff(x, y) == 5.0);
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!simd::avx2_supported()) return;
  std::mt19937_64 rng(7);
  // Lengths straddle the 4-lane width and the unrolled tail.
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 1001u}) {
    CAPTURE(n);
    const auto x = random_vector(rng, n);
    const auto y0 = random_vector(rng, n);
    const double a = 0.37;

    auto ys = y0, yv = y0;
    simd::scalar::add(x, ys);
    simd::avx2::add(x, yv);
    CHECK(ys == yv);

    ys = y0, yv = y0;
    simd::scalar::sub(x, ys);
    simd::avx2::sub(x, yv);
    CHECK(ys == yv);

    ys = y0, yv = y0;
    simd::scalar::axpy(a, x, ys);
    simd::avx2::axpy(a, x, yv);
    CHECK(ys == yv);

    ys = y0, yv = y0;
    simd::scalar::scale(a, ys);
    simd::avx2::scale(a, yv);
    CHECK(ys == yv);

    CHECK(simd::scalar::max_abs(x) == simd::avx2::max_abs(x));
    CHECK(simd::scalar::max_abs_diff(x, y0) == simd::avx2::max_abs_diff(x, y0));
    const double ds = simd::scalar::dot(x, y0);
    const double dv = simd::avx2::dot(x, y0);
    CHECK(std::abs(ds - dv) <= 1e-13 * (1.0 + simd::scalar::dot(x, x)));
  }
}
#endif

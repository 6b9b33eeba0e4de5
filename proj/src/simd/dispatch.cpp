#include "lck/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace lck::simd {

namespace {

struct Table {
  Isa isa;
  void (*add)(std::span<const double>, std::span<double>);
  void (*sub)(std::span<const double>, std::span<double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  void (*scale)(double, std::span<double>);
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*max_abs)(std::span<const double>);
  double (*max_abs_diff)(std::span<const double>, std::span<const double>);
};

Table make_table() {
  const char* forced = std::getenv("LCK_SIMD");
  const bool force_scalar = forced != nullptr && std::strcmp(forced, "scalar") == 0;
#if defined(LCK_HAVE_AVX2_KERNELS)
  if (!force_scalar && avx2_supported()) {
    return {Isa::Avx2,   avx2::add,     avx2::sub,         avx2::axpy,
            avx2::scale, avx2::dot,     avx2::max_abs,     avx2::max_abs_diff};
  }
#else
  (void)force_scalar;
#endif
  return {Isa::Scalar,   scalar::add,   scalar::sub,       scalar::axpy,
          scalar::scale, scalar::dot,   scalar::max_abs,   scalar::max_abs_diff};
}

const Table& table() {
  static const Table t = make_table();
  return t;
}

}  // namespace

bool avx2_supported() {
#if defined(LCK_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() { return table().isa; }

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void add(std::span<const double> x, std::span<double> y) { table().add(x, y); }
void sub(std::span<const double> x, std::span<double> y) { table().sub(x, y); }
void axpy(double a, std::span<const double> x, std::span<double> y) { table().axpy(a, x, y); }
void scale(double a, std::span<double> y) { table().scale(a, y); }
double dot(std::span<const double> x, std::span<const double> y) { return table().dot(x, y); }
double max_abs(std::span<const double> x) { return table().max_abs(x); }
double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  return table().max_abs_diff(x, y);
}

}  // namespace lck::simd

#pragma once

// Data-parallel inner loops over contiguous double arrays.
//
// Every kernel has a scalar reference implementation and, where the CPU
// supports it, an AVX2 variant. The variant is chosen once at first use;
// setting LCK_SIMD=scalar in the environment forces the reference path.
// Elementwise kernels are bit-identical across variants (no FMA contraction);
// reductions (dot) may differ in the last few ulps because of lane ordering.

#include <span>

namespace lck::simd {

enum class Isa { Scalar, Avx2 };

Isa active_isa();
const char* isa_name(Isa isa);
bool avx2_supported();

// y += x
void add(std::span<const double> x, std::span<double> y);
// y -= x
void sub(std::span<const double> x, std::span<double> y);
// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
// y *= a
void scale(double a, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double max_abs(std::span<const double> x);
double max_abs_diff(std::span<const double> x, std::span<const double> y);

namespace scalar {
void add(std::span<const double> x, std::span<double> y);
void sub(std::span<const double> x, std::span<double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double max_abs(std::span<const double> x);
double max_abs_diff(std::span<const double> x, std::span<const double> y);
}  // namespace scalar

// Only valid to call when avx2_supported() is true.
namespace avx2 {
void add(std::span<const double> x, std::span<double> y);
void sub(std::span<const double> x, std::span<double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double max_abs(std::span<const double> x);
double max_abs_diff(std::span<const double> x, std::span<const double> y);
}  // namespace avx2

}  // namespace lck::simd

#pragma once

// Complex-valued helpers for building fixtures: complex scalar fields,
// holomorphic vector fields and complexified forms, all reduced to real
// fields over the (x1, y1, ..., xn, yn) frame.

#include <complex>
#include <vector>

#include "lck/calculus/forms.hpp"

namespace lck::calc {

using cplx = std::complex<double>;

struct CField {
  ScalarField re;
  ScalarField im;

  CField() = default;
  CField(ScalarField r, ScalarField i) : re(std::move(r)), im(std::move(i)) {}
  CField(ScalarField r) : re(std::move(r)), im(0.0) {}  // NOLINT
  CField(double r) : re(r), im(0.0) {}                  // NOLINT
  CField(cplx c) : re(c.real()), im(c.imag()) {}        // NOLINT

  // z_j = x_j + i y_j on a chart of complex dimension >= j + 1.
  static CField z(int j);
  CField conj() const { return {re, -im}; }
  ScalarField abs2() const { return square(re) + square(im); }
  cplx operator()(const Point& p) const { return {re(p), im(p)}; }

  CField operator-() const { return {-re, -im}; }
  friend CField operator+(const CField& a, const CField& b) { return {a.re + b.re, a.im + b.im}; }
  friend CField operator-(const CField& a, const CField& b) { return {a.re - b.re, a.im - b.im}; }
  friend CField operator*(const CField& a, const CField& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend CField operator/(const CField& a, const CField& b);
};

CField exp(const CField& u);
CField pow_int(const CField& u, int k);
// Real chart map with target coordinates (Re c_0, Im c_0, Re c_1, Im c_1, ...).
ChartMap chart_map(int source_dim, const std::vector<CField>& components);

// Re(sum_j a_j ∂/∂z_j) := sum_j a_j ∂/∂z_j + conj, i.e. the real field
// sum_j (Re a_j ∂/∂x_j + Im a_j ∂/∂y_j).
VectorField real_part(const std::vector<CField>& holomorphic_coeffs);

// A complexified form re + i im.
struct ComplexForm {
  DifferentialForm re;
  DifferentialForm im;

  static ComplexForm dz(int dim, int j);
  static ComplexForm dzbar(int dim, int j);
  ComplexForm conj() const { return {re, -im}; }
  friend ComplexForm operator+(const ComplexForm& a, const ComplexForm& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend ComplexForm operator*(const CField& f, const ComplexForm& a) {
    return {f.re * a.re - f.im * a.im, f.re * a.im + f.im * a.re};
  }
};

ComplexForm wedge(const ComplexForm& a, const ComplexForm& b);
ComplexForm apply_J(const ComplexForm& a);

}  // namespace lck::calc

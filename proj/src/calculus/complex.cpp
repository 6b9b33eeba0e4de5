#include "lck/calculus/complex.hpp"

namespace lck::calc {

CField CField::z(int j) { return {ScalarField::coordinate(2 * j), ScalarField::coordinate(2 * j + 1)}; }

CField operator/(const CField& a, const CField& b) {
  const ScalarField den = b.abs2();
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}

CField exp(const CField& u) {
  const ScalarField m = exp(u.re);
  return {m * cos(u.im), m * sin(u.im)};
}

CField pow_int(const CField& u, int k) {
  if (k < 0) return CField(1.0) / pow_int(u, -k);
  CField r(1.0);
  CField base = u;
  while (k > 0) {
    if (k & 1) r = r * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return r;
}

ChartMap chart_map(int source_dim, const std::vector<CField>& components) {
  std::vector<ScalarField> out;
  for (const auto& c : components) {
    out.push_back(c.re);
    out.push_back(c.im);
  }
  return ChartMap(source_dim, std::move(out));
}

VectorField real_part(const std::vector<CField>& a) {
  VectorField X(2 * static_cast<int>(a.size()));
  for (std::size_t j = 0; j < a.size(); ++j) {
    X[2 * j] = a[j].re;
    X[2 * j + 1] = a[j].im;
  }
  return X;
}

ComplexForm ComplexForm::dz(int dim, int j) {
  return {DifferentialForm::basis(dim, {2 * j}), DifferentialForm::basis(dim, {2 * j + 1})};
}

ComplexForm ComplexForm::dzbar(int dim, int j) { return dz(dim, j).conj(); }

ComplexForm wedge(const ComplexForm& a, const ComplexForm& b) {
  return {wedge(a.re, b.re) - wedge(a.im, b.im), wedge(a.re, b.im) + wedge(a.im, b.re)};
}

ComplexForm apply_J(const ComplexForm& a) { return {apply_J(a.re), apply_J(a.im)}; }

}  // namespace lck::calc

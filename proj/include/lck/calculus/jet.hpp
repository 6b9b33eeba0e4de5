#pragma once

// Truncated multivariate Taylor polynomials ("jets").
//
// A Jet in layout (dim, order) stores normalized Taylor coefficients
// c_a = (d^a f)(p) / a! for every multi-index a with |a| <= order. Monomials
// are ordered by total degree, and within one degree by a fixed enumeration
// that does not depend on `order`, so layout(dim, k) is a prefix of
// layout(dim, k + 1). Truncation is therefore a prefix copy.

#include <cstdint>
#include <algorithm>
#include <memory>
#include <span>
#include <vector>

namespace lck::calc {

class JetLayout {
 public:
  struct Term {
    std::uint32_t a;
    std::uint32_t b;
    std::uint32_t out;
  };

  // Shared, immutable layouts; safe to call from several threads.
  static const JetLayout& get(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(degree_.size()); }

  std::span<const std::uint8_t> exponent(int idx) const {
    return {exps_.data() + static_cast<std::size_t>(idx) * dim_, static_cast<std::size_t>(dim_)};
  }
  int degree(int idx) const { return degree_[idx]; }
  // First index of total degree d (d may be order + 1, giving size()).
  int degree_begin(int d) const { return degree_begin_[d]; }
  int unit(int var) const { return 1 + var; }

  // Index of exponent(idx) + e_var, or -1 when that exceeds the order.
  int raise(int idx, int var) const { return raise_[static_cast<std::size_t>(idx) * dim_ + var]; }
  // Index of exponent(idx) - e_var, or -1 when exponent(idx)[var] == 0.
  int lower(int idx, int var) const { return lower_[static_cast<std::size_t>(idx) * dim_ + var]; }
  // -1 when not representable.
  int index(std::span<const std::uint8_t> exps) const;

  // All (a, b, out) with monomial(a) * monomial(b) = monomial(out).
  std::span<const Term> products() const { return products_; }
  // a! for each monomial, to convert Taylor coefficients into derivatives.
  double factorial(int idx) const { return factorial_[idx]; }

 private:
  JetLayout(int dim, int order);

  int dim_;
  int order_;
  std::vector<std::uint8_t> exps_;
  std::vector<int> degree_;
  std::vector<int> degree_begin_;
  std::vector<int> raise_;
  std::vector<int> lower_;
  std::vector<Term> products_;
  std::vector<double> factorial_;
};

// Coefficient storage with inline room for the small jets that dominate
// pointwise evaluation; larger jets go to the heap.
class CoeffBuffer {
 public:
  static constexpr std::size_t kInline = 21;

  CoeffBuffer() = default;
  CoeffBuffer(std::size_t n, double v) : n_(n) {
    if (n_ > kInline) heap_ = std::make_unique<double[]>(n_);
    std::fill(data(), data() + n_, v);
  }
  CoeffBuffer(const CoeffBuffer& o) : n_(o.n_) {
    if (n_ > kInline) heap_ = std::make_unique<double[]>(n_);
    std::copy(o.data(), o.data() + n_, data());
  }
  CoeffBuffer(CoeffBuffer&& o) noexcept : n_(o.n_), heap_(std::move(o.heap_)) {
    if (!heap_) std::copy(o.inline_, o.inline_ + n_, inline_);
    o.n_ = 0;
  }
  CoeffBuffer& operator=(const CoeffBuffer& o) {
    if (this != &o) *this = CoeffBuffer(o);
    return *this;
  }
  CoeffBuffer& operator=(CoeffBuffer&& o) noexcept {
    n_ = o.n_;
    heap_ = std::move(o.heap_);
    if (!heap_) std::copy(o.inline_, o.inline_ + n_, inline_);
    o.n_ = 0;
    return *this;
  }

  std::size_t size() const { return n_; }
  double* data() { return heap_ ? heap_.get() : inline_; }
  const double* data() const { return heap_ ? heap_.get() : inline_; }
  double* begin() { return data(); }
  double* end() { return data() + n_; }
  const double* begin() const { return data(); }
  const double* end() const { return data() + n_; }
  double& operator[](std::size_t i) { return data()[i]; }
  double operator[](std::size_t i) const { return data()[i]; }
  operator std::span<double>() { return {data(), n_}; }              // NOLINT
  operator std::span<const double>() const { return {data(), n_}; }  // NOLINT

 private:
  std::size_t n_ = 0;
  std::unique_ptr<double[]> heap_;
  double inline_[kInline];
};

class Jet {
 public:
  explicit Jet(const JetLayout& layout);

  static Jet constant(const JetLayout& layout, double value);
  // value + (x_var - p_var): the coordinate function around the base point.
  static Jet variable(const JetLayout& layout, int var, double value);

  const JetLayout& layout() const { return *layout_; }
  int dim() const { return layout_->dim(); }
  int order() const { return layout_->order(); }

  double value() const { return c_[0]; }
  double& value() { return c_[0]; }
  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs() { return c_; }
  double operator[](int idx) const { return c_[idx]; }
  double& operator[](int idx) { return c_[idx]; }

  // df/dx_var at the base point.
  double d1(int var) const;
  // d^2 f / dx_i dx_j at the base point.
  double d2(int i, int j) const;
  // Mixed partial for an arbitrary multi-index.
  double derivative(std::span<const std::uint8_t> multi) const;

  Jet truncated(int order) const;
  bool same_layout(const Jet& other) const { return layout_ == other.layout_; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  // this += s * o
  Jet& axpy(double s, const Jet& o);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator*(const Jet& a, const Jet& b);

 private:
  const JetLayout* layout_;
  CoeffBuffer c_;
};

// f(u) for a univariate f given by its normalized Taylor coefficients
// taylor[k] = f^(k)(u.value()) / k!, k = 0..order.
Jet compose_univariate(const Jet& u, std::span<const double> taylor);

Jet reciprocal(const Jet& u);
Jet operator/(const Jet& a, const Jet& b);

// Evaluates the Taylor polynomial `poly` (layout (m, K)) at the increments
// `deltas` (m jets in a common layout of order K with zero constant term).
Jet compose_polynomial(const Jet& poly, std::span<const Jet> deltas);

}  // namespace lck::calc

#include "lck/calculus/jet.hpp"

#include <cassert>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "lck/simd/kernels.hpp"

namespace lck::calc {

namespace {

// All exponent vectors of total degree `deg` in `dim` variables, first
// variable descending. For deg = 1 this yields e_0, e_1, ...
void enumerate(int dim, int deg, int var, std::vector<std::uint8_t>& cur,
               std::vector<std::uint8_t>& out) {
  if (var == dim - 1) {
    cur[var] = static_cast<std::uint8_t>(deg);
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (int k = deg; k >= 0; --k) {
    cur[var] = static_cast<std::uint8_t>(k);
    enumerate(dim, deg - k, var + 1, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

JetLayout::JetLayout(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1 || dim > 16 || order < 0 || order > 12) {
    throw std::invalid_argument("jet layout out of range");
  }
  std::vector<std::uint8_t> cur(dim, 0);
  for (int d = 0; d <= order; ++d) {
    degree_begin_.push_back(static_cast<int>(exps_.size() / dim));
    enumerate(dim, d, 0, cur, exps_);
    const int n = static_cast<int>(exps_.size() / dim);
    degree_.resize(n, d);
  }
  degree_begin_.push_back(size());

  std::map<std::vector<std::uint8_t>, int> lookup;
  for (int i = 0; i < size(); ++i) {
    auto e = exponent(i);
    lookup.emplace(std::vector<std::uint8_t>(e.begin(), e.end()), i);
  }
  raise_.assign(static_cast<std::size_t>(size()) * dim, -1);
  lower_.assign(static_cast<std::size_t>(size()) * dim, -1);
  factorial_.assign(size(), 1.0);
  for (int i = 0; i < size(); ++i) {
    auto e = exponent(i);
    std::vector<std::uint8_t> v(e.begin(), e.end());
    double f = 1.0;
    for (int k = 0; k < dim; ++k)
      for (int j = 2; j <= v[k]; ++j) f *= j;
    factorial_[i] = f;
    for (int k = 0; k < dim; ++k) {
      if (degree_[i] < order) {
        ++v[k];
        raise_[static_cast<std::size_t>(i) * dim + k] = lookup.at(v);
        --v[k];
      }
      if (v[k] > 0) {
        --v[k];
        lower_[static_cast<std::size_t>(i) * dim + k] = lookup.at(v);
        ++v[k];
      }
    }
  }
  for (int a = 0; a < size(); ++a) {
    for (int b = 0; b < size(); ++b) {
      if (degree_[a] + degree_[b] > order) {
        // b runs through increasing degree; nothing further fits.
        if (degree_[b] > order - degree_[a]) break;
      }
      std::vector<std::uint8_t> v(dim);
      auto ea = exponent(a);
      auto eb = exponent(b);
      for (int k = 0; k < dim; ++k) v[k] = static_cast<std::uint8_t>(ea[k] + eb[k]);
      products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                           static_cast<std::uint32_t>(lookup.at(v))});
    }
  }
}

const JetLayout& JetLayout::get(int dim, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{dim, order}];
  if (!slot) slot.reset(new JetLayout(dim, order));
  return *slot;
}

int JetLayout::index(std::span<const std::uint8_t> exps) const {
  if (static_cast<int>(exps.size()) != dim_) return -1;
  int idx = 0;
  for (int k = 0; k < dim_; ++k) {
    for (int j = 0; j < exps[k]; ++j) {
      idx = raise(idx, k);
      if (idx < 0) return -1;
    }
  }
  return idx;
}

Jet::Jet(const JetLayout& layout) : layout_(&layout), c_(layout.size(), 0.0) {}

Jet Jet::constant(const JetLayout& layout, double value) {
  Jet j(layout);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(const JetLayout& layout, int var, double value) {
  Jet j(layout);
  j.c_[0] = value;
  if (layout.order() >= 1) j.c_[layout.unit(var)] = 1.0;
  return j;
}

double Jet::d1(int var) const {
  if (order() < 1) throw std::logic_error("jet order too low for a first derivative");
  return c_[layout_->unit(var)];
}

double Jet::d2(int i, int j) const {
  if (order() < 2) throw std::logic_error("jet order too low for a second derivative");
  const int idx = layout_->raise(layout_->unit(i), j);
  return c_[idx] * layout_->factorial(idx);
}

double Jet::derivative(std::span<const std::uint8_t> multi) const {
  const int idx = layout_->index(multi);
  if (idx < 0) throw std::logic_error("jet order too low for the requested derivative");
  return c_[idx] * layout_->factorial(idx);
}

Jet Jet::truncated(int order) const {
  if (order > this->order()) throw std::logic_error("cannot raise the order of a jet");
  const JetLayout& l = JetLayout::get(dim(), order);
  Jet out(l);
  std::copy(c_.begin(), c_.begin() + l.size(), out.c_.begin());
  return out;
}

Jet& Jet::operator+=(const Jet& o) {
  assert(same_layout(o));
  simd::add(o.c_, c_);
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  assert(same_layout(o));
  simd::sub(o.c_, c_);
  return *this;
}

Jet& Jet::operator*=(double s) {
  simd::scale(s, c_);
  return *this;
}

Jet& Jet::axpy(double s, const Jet& o) {
  assert(same_layout(o));
  simd::axpy(s, o.c_, c_);
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  assert(a.same_layout(b));
  Jet out(a.layout());
  const double* pa = a.c_.data();
  const double* pb = b.c_.data();
  double* po = out.c_.data();
  for (const auto& t : a.layout().products()) po[t.out] += pa[t.a] * pb[t.b];
  return out;
}

Jet compose_univariate(const Jet& u, std::span<const double> taylor) {
  const int order = u.order();
  Jet delta = u;
  delta.value() = 0.0;
  // Horner in the nilpotent increment.
  Jet r = Jet::constant(u.layout(), taylor[order]);
  for (int k = order - 1; k >= 0; --k) {
    r = r * delta;
    r.value() += taylor[k];
  }
  return r;
}

Jet reciprocal(const Jet& u) {
  const double u0 = u.value();
  if (u0 == 0.0) throw std::domain_error("division by a jet with zero value");
  std::vector<double> t(u.order() + 1);
  double p = 1.0 / u0;
  for (int k = 0; k <= u.order(); ++k) {
    t[k] = (k % 2 == 0 ? 1.0 : -1.0) * p;
    p /= u0;
  }
  return compose_univariate(u, t);
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet compose_polynomial(const Jet& poly, std::span<const Jet> deltas) {
  const JetLayout& in = poly.layout();
  if (static_cast<int>(deltas.size()) != in.dim()) {
    throw std::invalid_argument("compose_polynomial: arity mismatch");
  }
  if (deltas.empty()) throw std::invalid_argument("compose_polynomial: no increments");
  const JetLayout& out_layout = deltas[0].layout();
  const int order = std::min(in.order(), out_layout.order());
  Jet result = Jet::constant(out_layout, poly[0]);
  if (order == 0) return result;

  std::vector<Jet> mono;
  mono.reserve(in.degree_begin(order + 1));
  mono.push_back(Jet::constant(out_layout, 1.0));
  for (int idx = 1; idx < in.degree_begin(order + 1); ++idx) {
    auto e = in.exponent(idx);
    int var = 0;
    while (e[var] == 0) ++var;
    mono.push_back(mono[in.lower(idx, var)] * deltas[var]);
    if (poly[idx] != 0.0) result.axpy(poly[idx], mono.back());
  }
  return result;
}

}  // namespace lck::calc

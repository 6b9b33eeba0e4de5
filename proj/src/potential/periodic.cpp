#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "lck/calculus/errors.hpp"
#include "lck/potential/potential.hpp"

namespace lck::pot {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

class TaylorFunction : public calc::UnivariateFunction {
 public:
  explicit TaylorFunction(PeriodicFunction::Taylor t) : t_(std::move(t)) {}
  void taylor(double u, int order, std::span<double> out) const override { t_(u, order, out); }

 private:
  PeriodicFunction::Taylor t_;
};

// t -> int_0^t f, with Taylor coefficients shifted from those of f.
class Primitive : public calc::UnivariateFunction {
 public:
  explicit Primitive(PeriodicFunction f) : f_(std::move(f)) {}
  void taylor(double u, int order, std::span<double> out) const override {
    double err = 0.0;
    out[0] = boost::math::quadrature::gauss_kronrod<double, 15>::integrate([this](double s) { return f_(s); }, 0.0, u,
                                                                           15, 1e-14, &err);
    if (order == 0) return;
    std::vector<double> c(order);
    f_.taylor(u, order - 1, c);
    for (int k = 0; k < order; ++k) out[k + 1] = c[k] / (k + 1);
  }

 private:
  PeriodicFunction f_;
};

double reduce(double t) {
  double r = std::fmod(t, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

std::string format_number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
using GL = boost::math::quadrature::gauss<double, 20>;

template <class F>
double integrate(F&& fn, double lo, double hi) {
  if (hi == lo) return 0.0;
  double err = 0.0, l1 = 0.0;
  const double v = GK::integrate(fn, lo, hi, 12, 1e-13, &err, &l1);
  if (!(err <= 1e-11 * std::max(1.0, l1))) {
    throw NumericalError("quadrature did not converge on [" + format_number(lo) + ", " + format_number(hi) + "]");
  }
  return v;
}

// Periodic solution on one period, tabulated on panel boundaries. With
// F(t) = int_0^t (1+f), g(t) = (G(t) + H(t)) / (1 - e^-b) where
// G(t) = int_t^2pi e^(F(t)-F(s)) ds and H(t) = int_0^t e^(F(t)-F(s)-b) ds,
// so every exponent is non-positive.
class ClosedForm {
 public:
  ClosedForm(PeriodicFunction f, double a, int nodes) : f_(std::move(f)), n_(nodes), h_(kTwoPi / nodes) {
    F_.assign(n_ + 1, 0.0);
    auto one_plus_f = [this](double s) { return 1.0 + f_(s); };
    for (int k = 0; k < n_; ++k) F_[k + 1] = F_[k] + integrate(one_plus_f, k * h_, (k + 1) * h_);
    // Taylor polynomial of F about each panel midpoint.
    P_.assign(n_ * (kOrder + 1), 0.0);
    std::vector<double> c(kOrder);
    for (int k = 0; k < n_; ++k) {
      double* p = &P_[k * (kOrder + 1)];
      const double mid = (k + 0.5) * h_;
      p[0] = F_[k] + GL::integrate(one_plus_f, k * h_, mid);
      f_.taylor(mid, kOrder - 1, c);
      c[0] += 1.0;
      for (int j = 0; j < kOrder; ++j) p[j + 1] = c[j] / (j + 1);
    }
    double sum = 0.0;
    for (int k = 0; k < n_; ++k) sum += 1.0 + f_(k * h_);
    b_ = sum * h_;
    G_.assign(n_ + 1, 0.0);
    H_.assign(n_ + 1, 0.0);
    for (int k = n_ - 1; k >= 0; --k) {
      const double Fk = F_[k];
      G_[k] = integrate([&](double s) { return std::exp(Fk - F(s)); }, k * h_, (k + 1) * h_) +
              std::exp(Fk - F_[k + 1]) * G_[k + 1];
    }
    for (int k = 0; k < n_; ++k) {
      const double Fk1 = F_[k + 1];
      H_[k + 1] = std::exp(Fk1 - F_[k]) * H_[k] +
                  integrate([&](double s) { return std::exp(Fk1 - F(s) - b_); }, k * h_, (k + 1) * h_);
    }
    K_ = std::exp(-a) * G_[0];
    c_ = K_ * std::exp(b_) / std::expm1(b_);
  }

  double F(double t) const {
    const int k = panel(t);
    const double* p = &P_[k * (kOrder + 1)];
    const double x = t - (k + 0.5) * h_;
    double v = p[kOrder];
    for (int j = kOrder - 1; j >= 0; --j) v = v * x + p[j];
    return v;
  }
  // On [0, 2pi] without periodic reduction.
  double raw(double t) const {
    const int k = panel(t);
    const double Ft = F(t);
    const double G = GL::integrate([&](double s) { return std::exp(Ft - F(s)); }, t, (k + 1) * h_) +
                     std::exp(Ft - F_[k + 1]) * G_[k + 1];
    const double H = std::exp(Ft - F_[k]) * H_[k] +
                     GL::integrate([&](double s) { return std::exp(Ft - F(s) - b_); }, k * h_, t);
    return (G + H) / -std::expm1(-b_);
  }
  double operator()(double t) const { return raw(reduce(t)); }

  // Taylor coefficients from g' = g(1+f) - 1.
  void taylor(double t, int order, std::span<double> out) const {
    std::vector<double> fc(order + 1);
    f_.taylor(t, order, fc);
    fc[0] += 1.0;
    out[0] = (*this)(t);
    for (int k = 0; k < order; ++k) {
      double s = k == 0 ? -1.0 : 0.0;
      for (int j = 0; j <= k; ++j) s += out[j] * fc[k - j];
      out[k + 1] = s / (k + 1);
    }
  }

  double b() const { return b_; }
  double K() const { return K_; }
  double c() const { return c_; }

 private:
  int panel(double t) const { return std::clamp(static_cast<int>(std::floor(t / h_)), 0, n_ - 1); }

  PeriodicFunction f_;
  int n_;
  double h_;
  static constexpr int kOrder = 12;
  std::vector<double> F_, G_, H_, P_;
  double b_ = 0.0, K_ = 0.0, c_ = 0.0;
};

// Five-point central differences.
template <class G>
double first_difference(const G& g, double t, double h) {
  return (g(t - 2 * h) - 8 * g(t - h) + 8 * g(t + h) - g(t + 2 * h)) / (12 * h);
}

template <class G>
double second_difference(const G& g, double t, double h) {
  return (-g(t - 2 * h) + 16 * g(t - h) - 30 * g(t) + 16 * g(t + h) - g(t + 2 * h)) / (12 * h * h);
}

}  // namespace

PeriodicFunction::PeriodicFunction(std::string label, Taylor taylor)
    : label_(std::move(label)), impl_(std::make_shared<TaylorFunction>(std::move(taylor))) {}

PeriodicFunction::PeriodicFunction(std::string label, Taylor taylor, Taylor primitive)
    : label_(std::move(label)),
      impl_(std::make_shared<TaylorFunction>(std::move(taylor))),
      primitive_(std::make_shared<TaylorFunction>(std::move(primitive))) {}

PeriodicFunction PeriodicFunction::constant(double k) {
  return trigonometric(k, {}, {}).relabel("const:" + format_number(k));
}

PeriodicFunction PeriodicFunction::cosine(double eps) { return trigonometric(0.0, {eps}, {}).relabel("cos:" + format_number(eps)); }

PeriodicFunction PeriodicFunction::trigonometric(double a0, std::vector<double> a, std::vector<double> b) {
  b.resize(std::max(a.size(), b.size()), 0.0);
  a.resize(b.size(), 0.0);
  std::ostringstream label;
  label << "trig:" << format_number(a0);
  for (std::size_t k = 0; k < a.size(); ++k) label << "," << format_number(a[k]) << "," << format_number(b[k]);
  // a cos kt + b sin kt and its j-th derivatives, which cycle with period 4.
  auto add_harmonic = [](double a, double b, double k, double t, int order, std::span<double> out) {
    const double c = std::cos(k * t), s = std::sin(k * t);
    double scale = 1.0;
    for (int j = 0; j <= order; ++j) {
      double d = 0.0;
      switch (j % 4) {
        case 0: d = a * c + b * s; break;
        case 1: d = -a * s + b * c; break;
        case 2: d = -a * c - b * s; break;
        case 3: d = a * s - b * c; break;
      }
      out[j] += scale * d;
      scale *= k / (j + 1);
    }
  };
  Taylor value = [a0, a, b, add_harmonic](double t, int order, std::span<double> out) {
    std::fill(out.begin(), out.begin() + order + 1, 0.0);
    out[0] = a0;
    for (std::size_t i = 0; i < a.size(); ++i) add_harmonic(a[i], b[i], i + 1.0, t, order, out);
  };
  // int_0^t: a0 t + sum (a sin kt - b cos kt + b) / k
  Taylor primitive = [a0, a, b, add_harmonic](double t, int order, std::span<double> out) {
    std::fill(out.begin(), out.begin() + order + 1, 0.0);
    out[0] = a0 * t;
    if (order >= 1) out[1] = a0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double k = i + 1.0;
      out[0] += b[i] / k;
      add_harmonic(-b[i] / k, a[i] / k, k, t, order, out);
    }
  };
  return PeriodicFunction(label.str(), std::move(value), std::move(primitive));
}

PeriodicFunction PeriodicFunction::relabel(std::string label) const {
  PeriodicFunction f = *this;
  f.label_ = std::move(label);
  return f;
}

PeriodicFunction PeriodicFunction::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("f must be const:<k> or cos:<eps>, got '" + spec + "'");
  const std::string kind = spec.substr(0, colon), value = spec.substr(colon + 1);
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::exception&) {
    throw std::invalid_argument("f parameter is not a number: '" + value + "'");
  }
  if (kind == "const") return constant(v);
  if (kind == "cos") return cosine(v);
  throw std::invalid_argument("f must be const:<k> or cos:<eps>, got '" + spec + "'");
}

double PeriodicFunction::operator()(double t) const {
  double v = 0.0;
  impl_->taylor(t, 0, std::span<double>(&v, 1));
  return v;
}

double PeriodicFunction::derivative(double t, int k) const {
  std::vector<double> c(k + 1);
  impl_->taylor(t, k, c);
  return std::tgamma(k + 1.0) * c[k];
}

void PeriodicFunction::taylor(double t, int order, std::span<double> out) const { impl_->taylor(t, order, out); }

ScalarField PeriodicFunction::of(const ScalarField& t) const { return calc::apply(impl_, t); }

ScalarField PeriodicFunction::primitive_of(const ScalarField& t) const {
  if (primitive_) return calc::apply(primitive_, t);
  return calc::apply(std::make_shared<Primitive>(*this), t);
}

double PeriodicFunction::periodicity_residual(int probes) const {
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const double t = kTwoPi * i / probes;
    worst = std::max(worst, std::abs((*this)(t + kTwoPi) - (*this)(t)));
  }
  return worst;
}

double PeriodicFunction::grid_min(int grid) const {
  double m = INFINITY;
  for (int i = 0; i < grid; ++i) m = std::min(m, (*this)(kTwoPi * i / grid));
  return m;
}

PotentialSolution solve_periodic_first_order(const PeriodicFunction& f, double a, int nodes) {
  if (nodes < 512) throw std::invalid_argument("the periodic solver needs at least 512 nodes");
  constexpr int grid = 1024;
  for (int i = 0; i < grid; ++i) {
    const double t = kTwoPi * i / grid;
    if (!(f(t) > -1.0)) {
      throw InadmissibleF("inadmissible f: f(" + format_number(t) + ") = " + format_number(f(t)) + " <= -1");
    }
  }
  auto cf = std::make_shared<const ClosedForm>(f, a, nodes);
  PotentialSolution s{f, PeriodicFunction("g[" + f.label() + "]",
                                          [cf](double t, int order, std::span<double> out) { cf->taylor(t, order, out); })};
  s.a = a;
  s.b = cf->b();
  s.K = cf->K();
  s.c = cf->c();
  s.nodes = nodes;
  s.periodicity = std::abs(cf->raw(kTwoPi) - cf->raw(0.0));

  auto g = [&](double t) { return (*cf)(t); };
  double best = INFINITY, tbest = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double t = kTwoPi * i / grid;
    const double gt = g(t);
    if (gt < best) best = gt, tbest = t;
    const double opf = 1.0 + f(t);
    const double g1 = first_difference(g, t, 1e-3);
    const double g2 = second_difference(g, t, 1e-2);
    s.first_order = std::max(s.first_order, std::abs(g1 - gt * opf + 1.0));
    s.second_order =
        std::max(s.second_order, std::abs(g2 - 2.0 * opf * g1 - gt * f.derivative(t) + gt * opf * opf - opf));
  }
  // Polish the minimum with Newton steps on g' = g(1+f) - 1 = 0.
  double t = tbest;
  for (int it = 0; it < 50; ++it) {
    double c[3];
    s.g.taylor(t, 2, c);
    if (c[2] <= 0.0) break;
    const double step = -c[1] / (2.0 * c[2]);
    if (std::abs(step) > kTwoPi / grid) break;
    t += step;
    if (std::abs(step) < 1e-15) break;
  }
  s.t_min = reduce(t);
  s.min_g = std::min(best, g(s.t_min));
  if (s.min_g == best) s.t_min = tbest;
  if (!(s.min_g > 0.0)) throw NumericalError("periodic solution is not positive");
  return s;
}

double duhamel_g(const std::function<double(double)>& f, double t, int nodes) {
  if (nodes < 64) throw std::invalid_argument("duhamel_g needs at least 64 nodes");
  if (t == 0.0) return 0.0;
  const int n = nodes + (nodes % 2);
  const double h = t / n;
  double sum = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double s = j * h;
    const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    sum += w * std::sin(t - s) * f(s);
  }
  return sum * h / 3.0;
}

double duhamel_residual(const std::function<double(double)>& f, double t, int nodes, double h) {
  const double gm = duhamel_g(f, t - h, nodes), g0 = duhamel_g(f, t, nodes), gp = duhamel_g(f, t + h, nodes);
  return std::abs((gp - 2.0 * g0 + gm) / (h * h) + g0 - f(t));
}

}  // namespace lck::pot

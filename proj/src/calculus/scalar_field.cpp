#include "lck/calculus/scalar_field.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "lck/calculus/errors.hpp"

namespace lck::calc {

namespace {

constexpr int kMaxOrder = 12;

class ConstantNode final : public Node {
 public:
  explicit ConstantNode(double v) : v(v) {}
  Jet compute(EvalContext& ctx, int order) const override {
    return Jet::constant(JetLayout::get(ctx.dim(), order), v);
  }
  bool cheap() const override { return true; }
  double v;
};

class CoordinateNode final : public Node {
 public:
  explicit CoordinateNode(int i) : i(i) {}
  Jet compute(EvalContext& ctx, int order) const override {
    if (i >= ctx.arity()) throw std::invalid_argument("coordinate index exceeds chart dimension");
    return ctx.input(i, order);
  }
  bool cheap() const override { return true; }
  int i;
};

class LinearNode final : public Node {
 public:
  Jet compute(EvalContext& ctx, int order) const override {
    Jet out = Jet::constant(JetLayout::get(ctx.dim(), order), constant);
    for (std::size_t k = 0; k < terms.size(); ++k) out.axpy(coeffs[k], ctx.eval(terms[k], order));
    return out;
  }
  std::vector<double> coeffs;
  std::vector<NodePtr> terms;
  double constant = 0.0;
};

class ProductNode final : public Node {
 public:
  ProductNode(NodePtr a, NodePtr b) : a(std::move(a)), b(std::move(b)) {}
  Jet compute(EvalContext& ctx, int order) const override {
    return ctx.eval(a, order) * ctx.eval(b, order);
  }
  NodePtr a, b;
};

class QuotientNode final : public Node {
 public:
  QuotientNode(NodePtr a, NodePtr b) : a(std::move(a)), b(std::move(b)) {}
  Jet compute(EvalContext& ctx, int order) const override {
    Jet den = ctx.eval(b, order);
    if (den.value() == 0.0) {
      throw NumericalError("division by zero", {ctx.base().begin(), ctx.base().end()});
    }
    return ctx.eval(a, order) * reciprocal(den);
  }
  NodePtr a, b;
};

class UnivariateNode final : public Node {
 public:
  UnivariateNode(std::shared_ptr<const UnivariateFunction> f, NodePtr u)
      : f(std::move(f)), u(std::move(u)) {}
  Jet compute(EvalContext& ctx, int order) const override {
    Jet arg = ctx.eval(u, order);
    std::vector<double> t(order + 1);
    f->taylor(arg.value(), order, t);
    return compose_univariate(arg, t);
  }
  std::shared_ptr<const UnivariateFunction> f;
  NodePtr u;
};

std::vector<Jet> increments(EvalContext& ctx, int order) {
  std::vector<Jet> d;
  d.reserve(ctx.arity());
  for (int i = 0; i < ctx.arity(); ++i) {
    d.push_back(ctx.input(i, order));
    d.back().value() = 0.0;
  }
  return d;
}

class PartialNode final : public Node {
 public:
  PartialNode(NodePtr child, int var) : child(std::move(child)), var(var) {}
  Jet compute(EvalContext& ctx, int order) const override {
    if (!ctx.identity()) {
      EvalContext& sub = ctx.identity_at(ctx.base());
      Jet poly = sub.eval(shared_from_this(), order);
      return compose_polynomial(poly, increments(ctx, order));
    }
    if (var >= ctx.arity()) throw std::invalid_argument("partial index exceeds chart dimension");
    if (order + 1 > kMaxOrder) throw std::invalid_argument("derivative order too high");
    Jet c = ctx.eval(child, order + 1);
    const JetLayout& lc = c.layout();
    const JetLayout& l = JetLayout::get(ctx.dim(), order);
    Jet out(l);
    for (int idx = 0; idx < l.size(); ++idx) {
      out[idx] = (l.exponent(idx)[var] + 1) * c[lc.raise(idx, var)];
    }
    return out;
  }
  NodePtr child;
  int var;
};

class ComposeNode final : public Node {
 public:
  Jet compute(EvalContext& ctx, int order) const override {
    std::vector<Jet> u;
    std::vector<double> at;
    u.reserve(map.size());
    for (const auto& m : map) {
      u.push_back(ctx.eval(m, order));
      at.push_back(u.back().value());
    }
    EvalContext& sub = ctx.identity_at(at);
    Jet poly = sub.eval(child, order);
    if (order == 0) return Jet::constant(JetLayout::get(ctx.dim(), 0), poly.value());
    for (auto& j : u) j.value() = 0.0;
    return compose_polynomial(poly, u);
  }
  NodePtr child;
  std::vector<NodePtr> map;
};

class ImplicitRootNode final : public Node {
 public:
  Jet compute(EvalContext& ctx, int order) const override {
    double tau;
    if (auto* hit = ctx.find_multi(this, 0)) {
      tau = (*hit)[0].value();
    } else {
      tau = solve(ctx.base());
      ctx.store_multi(this, {Jet::constant(JetLayout::get(ctx.dim(), 0), tau)});
    }
    const JetLayout& l = JetLayout::get(ctx.dim(), order);
    Jet t = Jet::constant(l, tau);
    if (order == 0) return t;
    std::vector<double> x(ctx.base().begin(), ctx.base().end());
    double dg;
    residual(x, tau, &dg);
    std::vector<Jet> inputs;
    for (int i = 0; i < arity; ++i) inputs.push_back(ctx.input(i, order));
    inputs.push_back(t);
    for (int k = 0; k < order; ++k) {
      inputs.back() = t;
      EvalContext c(inputs);
      t.axpy(-1.0 / dg, c.eval(G, order));
    }
    return t;
  }

  // G and dG/dtau at (x, tau), with jets in tau alone.
  double residual(const std::vector<double>& x, double tau, double* dg) const {
    const JetLayout& l = JetLayout::get(1, 1);
    std::vector<Jet> inputs;
    inputs.reserve(x.size() + 1);
    for (double v : x) inputs.push_back(Jet::constant(l, v));
    inputs.push_back(Jet::variable(l, 0, tau));
    EvalContext c(std::move(inputs));
    Jet j = c.eval(G, 1);
    *dg = j.d1(0);
    return j.value();
  }

  double solve(std::span<const double> base) const {
    std::vector<double> x(base.begin(), base.end());
    double a = guess(base);
    double dfa;
    double fa = residual(x, a, &dfa);
    if (fa == 0.0) return a;
    if (!std::isfinite(fa) || dfa == 0.0 || !std::isfinite(dfa)) {
      throw NumericalError("implicit root: degenerate starting point", x);
    }
    // Plain Newton from a good guess usually converges in a few steps; the
    // bracketed iteration below is the fallback.
    {
      double t = a, ft = fa, dft = dfa;
      for (int it = 0; it < 12; ++it) {
        const double step = ft / dft;
        t -= step;
        ft = residual(x, t, &dft);
        if (!std::isfinite(ft) || !std::isfinite(dft) || dft == 0.0) break;
        if (std::abs(step) <= 4e-16 * std::max(1.0, std::abs(t))) return t;
        if (std::abs(step) <= 1e-9 * std::max(1.0, std::abs(t))) {
          // One more step reaches full precision under quadratic convergence.
          return t - ft / dft;
        }
      }
    }
    // Bracket by stepping downhill with doubling steps.
    const double dir = (fa * dfa > 0.0) ? -1.0 : 1.0;
    double h = 0.25 * std::max(1.0, std::abs(a));
    double b = a, fb = fa;
    bool bracketed = false;
    for (int it = 0; it < 80; ++it) {
      b = a + dir * h;
      double dfb;
      fb = residual(x, b, &dfb);
      if (!std::isfinite(fb)) {
        h *= 0.5;
        continue;
      }
      if ((fb > 0.0) != (fa > 0.0) || fb == 0.0) {
        bracketed = true;
        break;
      }
      a = b;
      fa = fb;
      h *= 2.0;
    }
    if (!bracketed) throw NumericalError("implicit root: no sign change found", x);
    if (fb == 0.0) return b;
    // Safeguarded Newton inside [lo, hi].
    double lo = std::min(a, b), hi = std::max(a, b);
    const bool lo_positive = (a < b) ? (fa > 0.0) : (fb > 0.0);
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      double dft;
      const double ft = residual(x, t, &dft);
      if (ft == 0.0) return t;
      if ((ft > 0.0) == lo_positive) {
        lo = t;
      } else {
        hi = t;
      }
      double next = t - ft / dft;
      if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
      const double step = std::abs(next - t);
      t = next;
      if (step <= 4e-16 * std::max(1.0, std::abs(t)) || hi - lo <= 4e-16 * std::max(1.0, std::abs(t))) {
        return t;
      }
    }
    throw NumericalError("implicit root: iteration did not converge", x);
  }

  NodePtr G;
  int arity = 0;
  std::function<double(std::span<const double>)> guess;
};

struct LinearSystem {
  int r = 0;
  std::vector<NodePtr> M;
  std::vector<NodePtr> rhs;

  std::vector<Jet> solve(EvalContext& ctx, int order) const {
    std::vector<Jet> m, b;
    for (const auto& e : M) m.push_back(ctx.eval(e, order));
    for (const auto& e : rhs) b.push_back(ctx.eval(e, order));
    Eigen::MatrixXd m0(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) m0(i, j) = m[i * r + j].value();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m0);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
      throw NumericalError("singular linear system", {ctx.base().begin(), ctx.base().end()});
    }
    const Eigen::MatrixXd inv = lu.inverse();
    const JetLayout& l = JetLayout::get(ctx.dim(), order);
    auto apply_inverse = [&](const std::vector<Jet>& v) {
      std::vector<Jet> out(r, Jet(l));
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) out[i].axpy(inv(i, j), v[j]);
      return out;
    };
    std::vector<Jet> y = apply_inverse(b);
    for (int it = 0; it < order; ++it) {
      std::vector<Jet> res = b;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) res[i] -= m[i * r + j] * y[j];
      std::vector<Jet> dy = apply_inverse(res);
      for (int i = 0; i < r; ++i) y[i] += dy[i];
    }
    return y;
  }
};

class LinearSolveNode final : public Node {
 public:
  Jet compute(EvalContext& ctx, int order) const override {
    std::vector<Jet>* hit = ctx.find_multi(system.get(), order);
    if (!hit) {
      ctx.store_multi(system.get(), system->solve(ctx, order));
      hit = ctx.find_multi(system.get(), order);
    }
    const Jet& y = (*hit)[k];
    return y.order() == order ? y : y.truncated(order);
  }
  std::shared_ptr<const LinearSystem> system;
  int k = 0;
};

const ConstantNode* as_constant(const NodePtr& n) { return dynamic_cast<const ConstantNode*>(n.get()); }

// --- univariate primitives -------------------------------------------------

class ExpFn final : public UnivariateFunction {
 public:
  void taylor(double u, int order, std::span<double> out) const override {
    double e = std::exp(u);
    for (int k = 0; k <= order; ++k) {
      out[k] = e;
      e /= (k + 1);
    }
  }
};

class LogFn final : public UnivariateFunction {
 public:
  void taylor(double u, int order, std::span<double> out) const override {
    if (!(u > 0.0)) throw std::domain_error("log of a nonpositive value");
    out[0] = std::log(u);
    double p = 1.0;
    for (int k = 1; k <= order; ++k) {
      p /= u;
      out[k] = ((k % 2 == 1) ? 1.0 : -1.0) * p / k;
    }
  }
};

class SinCosFn final : public UnivariateFunction {
 public:
  explicit SinCosFn(bool cosine) : cosine_(cosine) {}
  void taylor(double u, int order, std::span<double> out) const override {
    const double s = std::sin(u), c = std::cos(u);
    // derivatives of sin: s, c, -s, -c; of cos: c, -s, -c, s
    const double cyc_sin[4] = {s, c, -s, -c};
    const double cyc_cos[4] = {c, -s, -c, s};
    const double* cyc = cosine_ ? cyc_cos : cyc_sin;
    double fact = 1.0;
    for (int k = 0; k <= order; ++k) {
      if (k > 0) fact *= k;
      out[k] = cyc[k % 4] / fact;
    }
  }

 private:
  bool cosine_;
};

class PowFn final : public UnivariateFunction {
 public:
  explicit PowFn(double p) : p_(p) {}
  void taylor(double u, int order, std::span<double> out) const override {
    const bool integer = p_ == std::floor(p_);
    if (!integer && !(u > 0.0)) throw std::domain_error("fractional power of a nonpositive value");
    if (u == 0.0) {
      // Integer power at zero: only the p-th coefficient survives.
      for (int k = 0; k <= order; ++k) out[k] = (p_ >= 0 && k == static_cast<int>(p_)) ? 1.0 : 0.0;
      if (p_ < 0) throw std::domain_error("negative power of zero");
      return;
    }
    double binom = 1.0;
    for (int k = 0; k <= order; ++k) {
      out[k] = binom * std::pow(u, p_ - k);
      binom *= (p_ - k) / (k + 1);
    }
  }

 private:
  double p_;
};

ScalarField unary(std::shared_ptr<const UnivariateFunction> f, const ScalarField& u) {
  if (u.is_constant()) {
    double t[1];
    f->taylor(u.constant_value(), 0, t);
    return ScalarField(t[0]);
  }
  return ScalarField(std::make_shared<UnivariateNode>(std::move(f), u.node()));
}

void collect(const ScalarField& f, double scale, std::vector<double>& coeffs,
             std::vector<NodePtr>& terms, double& constant) {
  if (f.is_constant()) {
    constant += scale * f.constant_value();
    return;
  }
  if (auto* lin = dynamic_cast<const LinearNode*>(f.node().get())) {
    constant += scale * lin->constant;
    for (std::size_t k = 0; k < lin->terms.size(); ++k) {
      coeffs.push_back(scale * lin->coeffs[k]);
      terms.push_back(lin->terms[k]);
    }
    return;
  }
  coeffs.push_back(scale);
  terms.push_back(f.node());
}

ScalarField make_linear(std::vector<double> coeffs, std::vector<NodePtr> terms, double constant) {
  // Drop zero terms and merge repeated nodes.
  std::vector<double> c;
  std::vector<NodePtr> t;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (coeffs[k] == 0.0) continue;
    bool merged = false;
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t[j] == terms[k]) {
        c[j] += coeffs[k];
        merged = true;
        break;
      }
    }
    if (!merged) {
      c.push_back(coeffs[k]);
      t.push_back(terms[k]);
    }
  }
  std::vector<double> c2;
  std::vector<NodePtr> t2;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (c[k] != 0.0) {
      c2.push_back(c[k]);
      t2.push_back(t[k]);
    }
  }
  if (t2.empty()) return ScalarField(constant);
  if (t2.size() == 1 && c2[0] == 1.0 && constant == 0.0) return ScalarField(t2[0]);
  auto n = std::make_shared<LinearNode>();
  n->coeffs = std::move(c2);
  n->terms = std::move(t2);
  n->constant = constant;
  return ScalarField(NodePtr(std::move(n)));
}

ScalarField scaled(const ScalarField& f, double s) {
  std::vector<double> c;
  std::vector<NodePtr> t;
  double k = 0.0;
  collect(f, s, c, t, k);
  return make_linear(std::move(c), std::move(t), k);
}

}  // namespace

// --- EvalContext -----------------------------------------------------------

EvalContext::EvalContext(std::span<const double> base)
    : identity_(true), base_(base.begin(), base.end()) {
  if (base_.empty()) throw std::invalid_argument("evaluation point has no coordinates");
  cache_.reserve(64);
}

EvalContext::EvalContext(std::vector<Jet> inputs) : identity_(false), inputs_(std::move(inputs)) {
  if (inputs_.empty()) throw std::invalid_argument("evaluation context needs inputs");
  for (const auto& j : inputs_) {
    if (!j.same_layout(inputs_[0])) throw std::invalid_argument("input jets must share a layout");
    base_.push_back(j.value());
  }
  cache_.reserve(64);
}

int EvalContext::max_order() const { return identity_ ? kMaxOrder : inputs_[0].order(); }

Jet EvalContext::input(int i, int order) const {
  if (identity_) return Jet::variable(JetLayout::get(arity(), order), i, base_[i]);
  if (order > inputs_[i].order()) throw std::invalid_argument("requested order exceeds input jets");
  return order == inputs_[i].order() ? inputs_[i] : inputs_[i].truncated(order);
}

Jet EvalContext::eval(const NodePtr& node, int order) {
  if (node->cheap()) return node->compute(*this, order);
  auto it = cache_.find(node.get());
  if (it != cache_.end() && it->second.jet.order() >= order) {
    const Jet& j = it->second.jet;
    return j.order() == order ? j : j.truncated(order);
  }
  Jet j = node->compute(*this, order);
  cache_.insert_or_assign(node.get(), Entry{node, j});
  return j;
}

EvalContext& EvalContext::identity_at(std::span<const double> base) {
  std::vector<double> key(base.begin(), base.end());
  auto& slot = children_[key];
  if (!slot) slot = std::make_unique<EvalContext>(std::span<const double>(key));
  return *slot;
}

std::vector<Jet>* EvalContext::find_multi(const void* key, int order) {
  auto it = multi_.find(key);
  if (it == multi_.end() || it->second.empty() || it->second[0].order() < order) return nullptr;
  return &it->second;
}

void EvalContext::store_multi(const void* key, std::vector<Jet> value) {
  multi_.insert_or_assign(key, std::move(value));
}

// --- ScalarField -----------------------------------------------------------

ScalarField::ScalarField() : node_(std::make_shared<ConstantNode>(0.0)) {}

ScalarField::ScalarField(double value) : node_(std::make_shared<ConstantNode>(value)) {}

ScalarField ScalarField::coordinate(int i) {
  if (i < 0) throw std::invalid_argument("negative coordinate index");
  return ScalarField(std::make_shared<CoordinateNode>(i));
}

bool ScalarField::is_constant() const { return as_constant(node_) != nullptr; }

double ScalarField::constant_value() const {
  auto* c = as_constant(node_);
  if (!c) throw std::logic_error("field is not constant");
  return c->v;
}

double ScalarField::operator()(const Point& p) const { return (*this)(p.coords()); }

double ScalarField::operator()(std::span<const double> p) const {
  EvalContext ctx(p);
  return ctx.eval(node_, 0).value();
}

Jet ScalarField::jet(const Point& p, int order) const {
  EvalContext ctx(p.coords());
  return ctx.eval(node_, order);
}

ScalarField ScalarField::partial(int i) const {
  if (is_constant()) return ScalarField(0.0);
  if (auto* c = dynamic_cast<const CoordinateNode*>(node_.get())) return ScalarField(c->i == i ? 1.0 : 0.0);
  if (auto* lin = dynamic_cast<const LinearNode*>(node_.get())) {
    std::vector<ScalarField> parts;
    for (const auto& t : lin->terms) parts.push_back(ScalarField(t).partial(i));
    return linear_combination(lin->coeffs, parts);
  }
  return ScalarField(std::make_shared<PartialNode>(node_, i));
}

ScalarField ScalarField::compose(std::vector<ScalarField> map) const {
  if (is_constant()) return *this;
  if (auto* c = dynamic_cast<const CoordinateNode*>(node_.get())) {
    if (c->i >= static_cast<int>(map.size())) throw std::invalid_argument("composition map too short");
    return map[c->i];
  }
  auto n = std::make_shared<ComposeNode>();
  n->child = node_;
  for (auto& m : map) n->map.push_back(m.node());
  return ScalarField(NodePtr(std::move(n)));
}

ScalarField ScalarField::operator-() const { return scaled(*this, -1.0); }

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  std::vector<double> c;
  std::vector<NodePtr> t;
  double k = 0.0;
  collect(a, 1.0, c, t, k);
  collect(b, 1.0, c, t, k);
  return make_linear(std::move(c), std::move(t), k);
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  if (b.is_zero()) return a;
  std::vector<double> c;
  std::vector<NodePtr> t;
  double k = 0.0;
  collect(a, 1.0, c, t, k);
  collect(b, -1.0, c, t, k);
  return make_linear(std::move(c), std::move(t), k);
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (a.is_constant()) {
    if (a.constant_value() == 0.0) return ScalarField(0.0);
    if (a.constant_value() == 1.0) return b;
    return scaled(b, a.constant_value());
  }
  if (b.is_constant()) return b * a;
  return ScalarField(std::make_shared<ProductNode>(a.node(), b.node()));
}

ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  if (b.is_constant()) {
    if (b.constant_value() == 0.0) throw std::domain_error("division by the zero field");
    return scaled(a, 1.0 / b.constant_value());
  }
  if (a.is_zero()) return ScalarField(0.0);
  return ScalarField(std::make_shared<QuotientNode>(a.node(), b.node()));
}

ScalarField linear_combination(std::span<const double> coeffs, std::span<const ScalarField> fields,
                               double constant) {
  if (coeffs.size() != fields.size()) throw std::invalid_argument("linear_combination: size mismatch");
  std::vector<double> c;
  std::vector<NodePtr> t;
  double k = constant;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (coeffs[i] != 0.0) collect(fields[i], coeffs[i], c, t, k);
  }
  return make_linear(std::move(c), std::move(t), k);
}

ScalarField exp(const ScalarField& u) {
  static const auto f = std::make_shared<const ExpFn>();
  return unary(f, u);
}

ScalarField log(const ScalarField& u) {
  static const auto f = std::make_shared<const LogFn>();
  return unary(f, u);
}

ScalarField sin(const ScalarField& u) {
  static const auto f = std::make_shared<const SinCosFn>(false);
  return unary(f, u);
}

ScalarField cos(const ScalarField& u) {
  static const auto f = std::make_shared<const SinCosFn>(true);
  return unary(f, u);
}

ScalarField sqrt(const ScalarField& u) { return pow(u, 0.5); }

ScalarField pow(const ScalarField& u, double p) {
  if (p == 0.0) return ScalarField(1.0);
  if (p == 1.0) return u;
  if (p == 2.0) return square(u);
  return unary(std::make_shared<const PowFn>(p), u);
}

ScalarField square(const ScalarField& u) {
  if (u.is_constant()) return ScalarField(u.constant_value() * u.constant_value());
  return u * u;
}

ScalarField apply(std::shared_ptr<const UnivariateFunction> f, const ScalarField& u) {
  return unary(std::move(f), u);
}

ScalarField implicit_root(ScalarField G, int arity,
                          std::function<double(std::span<const double>)> guess) {
  auto n = std::make_shared<ImplicitRootNode>();
  n->G = G.node();
  n->arity = arity;
  n->guess = std::move(guess);
  return ScalarField(NodePtr(std::move(n)));
}

std::vector<ScalarField> linear_solve(std::vector<ScalarField> M, std::vector<ScalarField> rhs) {
  const int r = static_cast<int>(rhs.size());
  if (static_cast<int>(M.size()) != r * r) throw std::invalid_argument("linear_solve: matrix size mismatch");
  auto sys = std::make_shared<LinearSystem>();
  sys->r = r;
  for (auto& m : M) sys->M.push_back(m.node());
  for (auto& b : rhs) sys->rhs.push_back(b.node());
  std::vector<ScalarField> out;
  for (int k = 0; k < r; ++k) {
    auto n = std::make_shared<LinearSolveNode>();
    n->system = sys;
    n->k = k;
    out.push_back(ScalarField(NodePtr(std::move(n))));
  }
  return out;
}

std::vector<ScalarField> coordinates(int dim) {
  std::vector<ScalarField> x;
  for (int i = 0; i < dim; ++i) x.push_back(ScalarField::coordinate(i));
  return x;
}

}  // namespace lck::calc

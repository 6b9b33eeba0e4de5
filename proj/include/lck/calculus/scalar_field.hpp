#pragma once

// Smooth real functions on a coordinate chart, stored as an immutable
// expression graph. Evaluation propagates Taylor jets through the graph, so
// derivatives of any order are exact up to floating-point rounding.

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "lck/calculus/jet.hpp"
#include "lck/calculus/point.hpp"

namespace lck::calc {

class EvalContext;

class Node : public std::enable_shared_from_this<Node> {
 public:
  virtual ~Node() = default;
  // Jet of this node in the variables of `ctx`, truncated at `order`.
  virtual Jet compute(EvalContext& ctx, int order) const = 0;
  virtual bool cheap() const { return false; }
};

using NodePtr = std::shared_ptr<const Node>;

// A univariate primitive described by its normalized Taylor coefficients:
// out[k] = f^(k)(u) / k! for k = 0..order.
class UnivariateFunction {
 public:
  virtual ~UnivariateFunction() = default;
  virtual void taylor(double u, int order, std::span<double> out) const = 0;
};

// Evaluation state for one base point: the inputs (as jets in some set of
// variables) plus a memo table so shared subexpressions are evaluated once.
// Not thread-safe; use one context per thread.
class EvalContext {
 public:
  // Inputs are the coordinate functions around `base`.
  explicit EvalContext(std::span<const double> base);
  // Inputs are arbitrary jets in a common layout.
  explicit EvalContext(std::vector<Jet> inputs);

  bool identity() const { return identity_; }
  int arity() const { return static_cast<int>(base_.size()); }
  int dim() const { return identity_ ? arity() : inputs_[0].dim(); }
  std::span<const double> base() const { return base_; }
  // Largest order the inputs support.
  int max_order() const;
  Jet input(int i, int order) const;

  Jet eval(const NodePtr& node, int order);
  // Identity context at another base point, shared between nodes.
  EvalContext& identity_at(std::span<const double> base);

  // Storage for nodes that produce several outputs at once.
  std::vector<Jet>* find_multi(const void* key, int order);
  void store_multi(const void* key, std::vector<Jet> value);

 private:
  struct Entry {
    NodePtr keep;
    Jet jet;
  };
  bool identity_;
  std::vector<double> base_;
  std::vector<Jet> inputs_;
  std::unordered_map<const Node*, Entry> cache_;
  std::unordered_map<const void*, std::vector<Jet>> multi_;
  std::map<std::vector<double>, std::unique_ptr<EvalContext>> children_;
};

class ScalarField {
 public:
  ScalarField();
  ScalarField(double value);  // NOLINT: constants convert implicitly
  explicit ScalarField(NodePtr node) : node_(std::move(node)) {}

  static ScalarField coordinate(int i);

  const NodePtr& node() const { return node_; }
  bool is_constant() const;
  // Only meaningful when is_constant().
  double constant_value() const;
  bool is_zero() const { return is_constant() && constant_value() == 0.0; }

  double operator()(const Point& p) const;
  double operator()(std::span<const double> p) const;
  Jet jet(const Point& p, int order) const;
  Jet jet(EvalContext& ctx, int order) const { return ctx.eval(node_, order); }
  double value(EvalContext& ctx) const { return ctx.eval(node_, 0).value(); }

  // d/dx_i as a new field.
  ScalarField partial(int i) const;
  // (this ∘ map)(x) = this(map_0(x), ..., map_{m-1}(x)).
  ScalarField compose(std::vector<ScalarField> map) const;

  ScalarField operator-() const;
  ScalarField& operator+=(const ScalarField& o) { return *this = *this + o; }
  ScalarField& operator-=(const ScalarField& o) { return *this = *this - o; }
  ScalarField& operator*=(const ScalarField& o) { return *this = *this * o; }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b);

 private:
  NodePtr node_;
};

// sum_k coeffs[k] * fields[k] + constant, as a single node.
ScalarField linear_combination(std::span<const double> coeffs, std::span<const ScalarField> fields,
                               double constant = 0.0);

ScalarField exp(const ScalarField& u);
ScalarField log(const ScalarField& u);
ScalarField sin(const ScalarField& u);
ScalarField cos(const ScalarField& u);
ScalarField sqrt(const ScalarField& u);
ScalarField pow(const ScalarField& u, double p);
ScalarField square(const ScalarField& u);
ScalarField apply(std::shared_ptr<const UnivariateFunction> f, const ScalarField& u);

// The function x -> tau(x) defined by G(x, tau(x)) = 0, where G has
// `arity + 1` inputs and tau is the last one. `guess` supplies a starting
// value; the scalar root is polished by a bracketed Newton iteration and the
// derivatives follow from the implicit function theorem.
ScalarField implicit_root(ScalarField G, int arity,
                          std::function<double(std::span<const double>)> guess);

// Solution y of the linear system M y = rhs with field entries (M row-major,
// size r*r). Fails at points where M is singular.
std::vector<ScalarField> linear_solve(std::vector<ScalarField> M, std::vector<ScalarField> rhs);

// Coordinate functions x_0..x_{dim-1}.
std::vector<ScalarField> coordinates(int dim);

}  // namespace lck::calc

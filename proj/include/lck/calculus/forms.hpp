#pragma once

// Vector fields and differential forms over the real coordinate frame of
// R^{2n} = C^n, ordered (x1, y1, ..., xn, yn), with the constant complex
// structure J dx_j = dy_j on 1-forms and J d/dx_j = d/dy_j on vectors.

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "lck/calculus/point.hpp"
#include "lck/calculus/scalar_field.hpp"

namespace lck::calc {

// Increasing index sets {i_1 < ... < i_k} in {0..dim-1}, in lexicographic order.
const std::vector<std::vector<int>>& index_sets(int dim, int degree);
// Position of a strictly increasing index set within index_sets(dim, size).
int index_rank(int dim, std::span<const int> sorted);

class VectorField {
 public:
  explicit VectorField(int dim) : comps_(dim) {}
  explicit VectorField(std::vector<ScalarField> comps) : comps_(std::move(comps)) {}
  static VectorField coordinate(int dim, int i);
  // X = sum_j a_j(x) ∂_j with constant coefficients.
  static VectorField constant(std::vector<double> coeffs);

  int dim() const { return static_cast<int>(comps_.size()); }
  const ScalarField& operator[](int i) const { return comps_[i]; }
  ScalarField& operator[](int i) { return comps_[i]; }
  const std::vector<ScalarField>& components() const { return comps_; }

  std::vector<double> values(const Point& p) const;
  std::vector<double> values(EvalContext& ctx) const;

  // X(f) = sum_i X^i ∂_i f.
  ScalarField apply(const ScalarField& f) const;
  VectorField J() const;

  VectorField operator-() const;
  friend VectorField operator+(const VectorField& a, const VectorField& b);
  friend VectorField operator-(const VectorField& a, const VectorField& b);
  friend VectorField operator*(const ScalarField& f, const VectorField& X);

 private:
  std::vector<ScalarField> comps_;
};

VectorField bracket(const VectorField& X, const VectorField& Y);
// J applied to a tangent vector given by its components.
std::vector<double> apply_J(std::span<const double> v);

class DifferentialForm {
 public:
  DifferentialForm(int dim, int degree);
  DifferentialForm(int dim, int degree, std::vector<ScalarField> coeffs);
  static DifferentialForm function(int dim, ScalarField f);
  // dx_{i_1} ^ ... ^ dx_{i_k}, indices in any order (sign applied).
  static DifferentialForm basis(int dim, std::vector<int> indices);
  static DifferentialForm coordinate_differential(int dim, int i) { return basis(dim, {i}); }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(coeffs_.size()); }
  const ScalarField& coeff(int k) const { return coeffs_[k]; }
  ScalarField& coeff(int k) { return coeffs_[k]; }
  const std::vector<ScalarField>& coeffs() const { return coeffs_; }
  // Coefficient of dx_{i_1} ^ ... ^ dx_{i_k} (strictly increasing indices).
  const ScalarField& at(std::span<const int> sorted) const { return coeffs_[index_rank(dim_, sorted)]; }
  const ScalarField& at(std::initializer_list<int> sorted) const {
    return at(std::span<const int>(sorted.begin(), sorted.size()));
  }
  // True when every coefficient is the literal zero constant.
  bool structurally_zero() const;

  std::vector<double> values(const Point& p) const;
  std::vector<double> values(EvalContext& ctx) const;
  // a(v_1, ..., v_k) at p; `vectors` holds k tangent vectors.
  double evaluate(const Point& p, const std::vector<std::vector<double>>& vectors) const;
  // Max-abs coefficient at p.
  double norm_at(const Point& p) const;
  double norm_at(EvalContext& ctx) const;

  DifferentialForm operator-() const;
  DifferentialForm& operator+=(const DifferentialForm& o);
  DifferentialForm& operator-=(const DifferentialForm& o);
  friend DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) { return a += b; }
  friend DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b) { return a -= b; }
  friend DifferentialForm operator*(const ScalarField& f, const DifferentialForm& a);
  friend DifferentialForm operator*(const DifferentialForm& a, const ScalarField& f) { return f * a; }

 private:
  int dim_;
  int degree_;
  std::vector<ScalarField> coeffs_;
};

// Alternating value of a k-form with coefficients `coeffs` on k vectors.
double evaluate_alternating(int dim, int degree, std::span<const double> coeffs,
                            const std::vector<std::vector<double>>& vectors);

// Max over points of the max-abs coefficient.
double sup_norm(const DifferentialForm& a, std::span<const Point> points);

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm exterior_d(const DifferentialForm& a);
// J extended to forms as a derivation; on 1-forms (Ja)(X) = -a(JX).
DifferentialForm apply_J(const DifferentialForm& a);
// J extended to forms as an algebra automorphism (J a_1 ^ ... ^ J a_k).
DifferentialForm apply_J_automorphism(const DifferentialForm& a);
// d^c = i(dbar - d), computed as J o d o J^{-1} with J the automorphism extension.
DifferentialForm dc(const DifferentialForm& a);
// d_theta a = da - theta ^ a, or d^c_theta a = d^c a - J theta ^ a when
// `conjugated`. When `probes` is non-empty, |d theta| is measured there and a
// warning appended to `warnings` if it exceeds `tol`.
DifferentialForm twisted_d(const DifferentialForm& a, const DifferentialForm& theta, bool conjugated,
                           std::span<const Point> probes = {}, std::vector<std::string>* warnings = nullptr,
                           double tol = 1e-10);
DifferentialForm interior_product(const VectorField& X, const DifferentialForm& a);
DifferentialForm lie_derivative(const VectorField& X, const DifferentialForm& a);

// A smooth map R^source_dim -> R^{components.size()}.
class ChartMap {
 public:
  ChartMap(int source_dim, std::vector<ScalarField> components);
  static ChartMap identity(int dim);

  int source_dim() const { return source_dim_; }
  int target_dim() const { return static_cast<int>(comps_.size()); }
  const std::vector<ScalarField>& components() const { return comps_; }

  Point operator()(const Point& p) const;
  Eigen::MatrixXd jacobian(const Point& p) const;
  // (this o inner)(x) = this(inner(x)).
  ChartMap after(const ChartMap& inner) const;

 private:
  int source_dim_;
  std::vector<ScalarField> comps_;
};

DifferentialForm pullback(const ChartMap& map, const DifferentialForm& a);
// x -> DF(x) X(x), i.e. the vector F_* X_x, which lives at F(x).
VectorField differential_applied(const ChartMap& map, const VectorField& X);
// X o F: the components of X evaluated at F(x).
VectorField compose(const VectorField& X, const ChartMap& map);

}  // namespace lck::calc

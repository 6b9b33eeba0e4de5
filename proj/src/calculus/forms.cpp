#include "lck/calculus/forms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "lck/simd/kernels.hpp"

namespace lck::calc {

namespace {

void combos(int dim, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < dim; ++i) {
    cur.push_back(i);
    combos(dim, k, i + 1, cur, out);
    cur.pop_back();
  }
}

// Sign of the permutation sorting `idx`; 0 if an index repeats.
int sort_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  return sign;
}

// Accumulates signed terms per output coefficient, then builds sums once.
class Accumulator {
 public:
  explicit Accumulator(int n) : coeffs_(n), terms_(n) {}
  void add(int k, double c, const ScalarField& f) {
    if (f.is_zero() || c == 0.0) return;
    coeffs_[k].push_back(c);
    terms_[k].push_back(f);
  }
  std::vector<ScalarField> build() const {
    std::vector<ScalarField> out;
    for (std::size_t k = 0; k < terms_.size(); ++k) out.push_back(linear_combination(coeffs_[k], terms_[k]));
    return out;
  }

 private:
  std::vector<std::vector<double>> coeffs_;
  std::vector<std::vector<ScalarField>> terms_;
};

void check_same_dim(int a, int b) {
  if (a != b) throw std::invalid_argument("forms live on charts of different dimension");
}

// J on the coframe: dx_j -> dy_j, dy_j -> -dx_j.
int j_partner(int i, double* sign) {
  if (i % 2 == 0) {
    *sign = 1.0;
    return i + 1;
  }
  *sign = -1.0;
  return i - 1;
}

}  // namespace

const std::vector<std::vector<int>>& index_sets(int dim, int degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(dim, degree);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<std::vector<int>> out;
  if (degree >= 0 && degree <= dim) {
    std::vector<int> cur;
    combos(dim, degree, 0, cur, out);
  }
  return cache.emplace(key, std::move(out)).first->second;
}

int index_rank(int dim, std::span<const int> sorted) {
  // Lexicographic rank of a k-subset of {0..dim-1}.
  const int k = static_cast<int>(sorted.size());
  auto binom = [](int n, int r) {
    if (r < 0 || r > n) return 0L;
    long v = 1;
    for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
    return v;
  };
  long rank = 0;
  int prev = -1;
  for (int p = 0; p < k; ++p) {
    for (int v = prev + 1; v < sorted[p]; ++v) rank += binom(dim - v - 1, k - p - 1);
    prev = sorted[p];
  }
  return static_cast<int>(rank);
}

// --- VectorField -----------------------------------------------------------

VectorField VectorField::coordinate(int dim, int i) {
  VectorField X(dim);
  X.comps_[i] = ScalarField(1.0);
  return X;
}

VectorField VectorField::constant(std::vector<double> coeffs) {
  VectorField X(static_cast<int>(coeffs.size()));
  for (std::size_t i = 0; i < coeffs.size(); ++i) X.comps_[i] = ScalarField(coeffs[i]);
  return X;
}

std::vector<double> VectorField::values(const Point& p) const {
  EvalContext ctx(p.coords());
  return values(ctx);
}

std::vector<double> VectorField::values(EvalContext& ctx) const {
  std::vector<double> v;
  v.reserve(comps_.size());
  for (const auto& c : comps_) v.push_back(c.value(ctx));
  return v;
}

ScalarField VectorField::apply(const ScalarField& f) const {
  std::vector<ScalarField> terms;
  for (int i = 0; i < dim(); ++i) {
    if (comps_[i].is_zero()) continue;
    ScalarField d = f.partial(i);
    if (d.is_zero()) continue;
    terms.push_back(comps_[i] * d);
  }
  std::vector<double> ones(terms.size(), 1.0);
  return linear_combination(ones, terms);
}

VectorField VectorField::J() const {
  VectorField out(dim());
  for (int j = 0; j + 1 < dim(); j += 2) {
    out.comps_[j] = -comps_[j + 1];
    out.comps_[j + 1] = comps_[j];
  }
  return out;
}

VectorField VectorField::operator-() const {
  VectorField out(dim());
  for (int i = 0; i < dim(); ++i) out.comps_[i] = -comps_[i];
  return out;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  check_same_dim(a.dim(), b.dim());
  VectorField out(a.dim());
  for (int i = 0; i < a.dim(); ++i) out.comps_[i] = a.comps_[i] + b.comps_[i];
  return out;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  check_same_dim(a.dim(), b.dim());
  VectorField out(a.dim());
  for (int i = 0; i < a.dim(); ++i) out.comps_[i] = a.comps_[i] - b.comps_[i];
  return out;
}

VectorField operator*(const ScalarField& f, const VectorField& X) {
  VectorField out(X.dim());
  for (int i = 0; i < X.dim(); ++i) out.comps_[i] = f * X.comps_[i];
  return out;
}

VectorField bracket(const VectorField& X, const VectorField& Y) {
  check_same_dim(X.dim(), Y.dim());
  VectorField out(X.dim());
  for (int k = 0; k < X.dim(); ++k) out[k] = X.apply(Y[k]) - Y.apply(X[k]);
  return out;
}

std::vector<double> apply_J(std::span<const double> v) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t j = 0; j + 1 < v.size(); j += 2) {
    out[j] = -v[j + 1];
    out[j + 1] = v[j];
  }
  return out;
}

// --- DifferentialForm ------------------------------------------------------

DifferentialForm::DifferentialForm(int dim, int degree)
    : dim_(dim), degree_(degree), coeffs_(index_sets(dim, degree).size()) {
  if (dim < 1 || degree < 0) throw std::invalid_argument("invalid form shape");
}

DifferentialForm::DifferentialForm(int dim, int degree, std::vector<ScalarField> coeffs)
    : dim_(dim), degree_(degree), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != index_sets(dim, degree).size()) {
    throw std::invalid_argument("coefficient count does not match the form degree");
  }
}

DifferentialForm DifferentialForm::function(int dim, ScalarField f) {
  return DifferentialForm(dim, 0, {std::move(f)});
}

DifferentialForm DifferentialForm::basis(int dim, std::vector<int> indices) {
  DifferentialForm out(dim, static_cast<int>(indices.size()));
  const int sign = sort_sign(indices);
  if (sign == 0 || out.size() == 0) return out;
  out.coeffs_[index_rank(dim, indices)] = ScalarField(static_cast<double>(sign));
  return out;
}

bool DifferentialForm::structurally_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const ScalarField& f) { return f.is_zero(); });
}

std::vector<double> DifferentialForm::values(const Point& p) const {
  EvalContext ctx(p.coords());
  return values(ctx);
}

std::vector<double> DifferentialForm::values(EvalContext& ctx) const {
  std::vector<double> v;
  v.reserve(coeffs_.size());
  for (const auto& c : coeffs_) v.push_back(c.is_zero() ? 0.0 : c.value(ctx));
  return v;
}

double evaluate_alternating(int dim, int degree, std::span<const double> coeffs,
                            const std::vector<std::vector<double>>& vectors) {
  if (static_cast<int>(vectors.size()) != degree) throw std::invalid_argument("wrong number of vectors");
  const auto& sets = index_sets(dim, degree);
  double total = 0.0;
  Eigen::MatrixXd m(degree, degree);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (coeffs[s] == 0.0) continue;
    for (int r = 0; r < degree; ++r)
      for (int c = 0; c < degree; ++c) m(r, c) = vectors[c][sets[s][r]];
    total += coeffs[s] * (degree == 0 ? 1.0 : m.determinant());
  }
  return total;
}

double DifferentialForm::evaluate(const Point& p, const std::vector<std::vector<double>>& vectors) const {
  const auto v = values(p);
  return evaluate_alternating(dim_, degree_, v, vectors);
}

double DifferentialForm::norm_at(const Point& p) const {
  EvalContext ctx(p.coords());
  return norm_at(ctx);
}

double DifferentialForm::norm_at(EvalContext& ctx) const {
  const auto v = values(ctx);
  return simd::max_abs(v);
}

DifferentialForm DifferentialForm::operator-() const {
  DifferentialForm out(dim_, degree_);
  for (int k = 0; k < size(); ++k) out.coeffs_[k] = -coeffs_[k];
  return out;
}

DifferentialForm& DifferentialForm::operator+=(const DifferentialForm& o) {
  check_same_dim(dim_, o.dim_);
  if (degree_ != o.degree_) throw std::invalid_argument("adding forms of different degree");
  for (int k = 0; k < size(); ++k) coeffs_[k] = coeffs_[k] + o.coeffs_[k];
  return *this;
}

DifferentialForm& DifferentialForm::operator-=(const DifferentialForm& o) {
  check_same_dim(dim_, o.dim_);
  if (degree_ != o.degree_) throw std::invalid_argument("subtracting forms of different degree");
  for (int k = 0; k < size(); ++k) coeffs_[k] = coeffs_[k] - o.coeffs_[k];
  return *this;
}

DifferentialForm operator*(const ScalarField& f, const DifferentialForm& a) {
  DifferentialForm out(a.dim_, a.degree_);
  for (int k = 0; k < a.size(); ++k) out.coeffs_[k] = f * a.coeffs_[k];
  return out;
}

double sup_norm(const DifferentialForm& a, std::span<const Point> points) {
  if (a.structurally_zero()) return 0.0;
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, a.norm_at(p));
  return worst;
}

// --- operations ------------------------------------------------------------

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  check_same_dim(a.dim(), b.dim());
  const int dim = a.dim();
  const int deg = a.degree() + b.degree();
  if (deg > dim) return DifferentialForm(dim, deg);
  const auto& sa = index_sets(dim, a.degree());
  const auto& sb = index_sets(dim, b.degree());
  Accumulator acc(static_cast<int>(index_sets(dim, deg).size()));
  std::vector<int> merged;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (a.coeff(i).is_zero()) continue;
    for (std::size_t j = 0; j < sb.size(); ++j) {
      if (b.coeff(j).is_zero()) continue;
      merged = sa[i];
      merged.insert(merged.end(), sb[j].begin(), sb[j].end());
      const int sign = sort_sign(merged);
      if (sign == 0) continue;
      acc.add(index_rank(dim, merged), sign, a.coeff(i) * b.coeff(j));
    }
  }
  return DifferentialForm(dim, deg, acc.build());
}

DifferentialForm exterior_d(const DifferentialForm& a) {
  const int dim = a.dim();
  const int deg = a.degree() + 1;
  if (deg > dim) return DifferentialForm(dim, deg);
  const auto& src = index_sets(dim, a.degree());
  Accumulator acc(static_cast<int>(index_sets(dim, deg).size()));
  std::vector<int> merged;
  for (std::size_t s = 0; s < src.size(); ++s) {
    if (a.coeff(s).is_zero()) continue;
    for (int i = 0; i < dim; ++i) {
      if (std::find(src[s].begin(), src[s].end(), i) != src[s].end()) continue;
      ScalarField d = a.coeff(s).partial(i);
      if (d.is_zero()) continue;
      merged.assign(1, i);
      merged.insert(merged.end(), src[s].begin(), src[s].end());
      const int sign = sort_sign(merged);
      acc.add(index_rank(dim, merged), sign, d);
    }
  }
  return DifferentialForm(dim, deg, acc.build());
}

DifferentialForm apply_J(const DifferentialForm& a) {
  const int dim = a.dim();
  if (dim % 2 != 0) throw std::invalid_argument("J needs an even-dimensional chart");
  const auto& sets = index_sets(dim, a.degree());
  Accumulator acc(a.size());
  std::vector<int> idx;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (a.coeff(s).is_zero()) continue;
    for (std::size_t p = 0; p < sets[s].size(); ++p) {
      double js;
      const int partner = j_partner(sets[s][p], &js);
      idx = sets[s];
      idx[p] = partner;
      const int sign = sort_sign(idx);
      if (sign == 0) continue;
      acc.add(index_rank(dim, idx), js * sign, a.coeff(s));
    }
  }
  return DifferentialForm(dim, a.degree(), acc.build());
}

DifferentialForm apply_J_automorphism(const DifferentialForm& a) {
  const int dim = a.dim();
  if (dim % 2 != 0) throw std::invalid_argument("J needs an even-dimensional chart");
  const auto& sets = index_sets(dim, a.degree());
  Accumulator acc(a.size());
  std::vector<int> idx;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (a.coeff(s).is_zero()) continue;
    double total = 1.0;
    idx = sets[s];
    for (auto& i : idx) {
      double js;
      i = j_partner(i, &js);
      total *= js;
    }
    const int sign = sort_sign(idx);
    if (sign == 0) continue;
    acc.add(index_rank(dim, idx), total * sign, a.coeff(s));
  }
  return DifferentialForm(dim, a.degree(), acc.build());
}

DifferentialForm dc(const DifferentialForm& a) {
  // On 1-forms J^{-1} = -J, so on k-forms the automorphism inverse is (-1)^k J.
  DifferentialForm inv = apply_J_automorphism(a);
  if (a.degree() % 2 == 1) inv = -inv;
  return apply_J_automorphism(exterior_d(inv));
}

DifferentialForm twisted_d(const DifferentialForm& a, const DifferentialForm& theta, bool conjugated,
                           std::span<const Point> probes, std::vector<std::string>* warnings, double tol) {
  if (theta.degree() != 1) throw std::invalid_argument("twisting form must be a 1-form");
  if (!probes.empty() && warnings) {
    const DifferentialForm dtheta = exterior_d(theta);
    double worst = 0.0;
    for (const auto& p : probes) worst = std::max(worst, dtheta.norm_at(p));
    if (worst > tol) {
      warnings->push_back("twisting form is not closed (|d theta| = " + std::to_string(worst) +
                          "); the twisted differential does not square to zero");
    }
  }
  if (conjugated) return dc(a) - wedge(apply_J(theta), a);
  return exterior_d(a) - wedge(theta, a);
}

DifferentialForm interior_product(const VectorField& X, const DifferentialForm& a) {
  if (a.degree() == 0) throw std::invalid_argument("cannot contract a function");
  check_same_dim(X.dim(), a.dim());
  const int dim = a.dim();
  const auto& dst = index_sets(dim, a.degree() - 1);
  std::vector<ScalarField> out;
  std::vector<int> merged;
  for (const auto& J : dst) {
    std::vector<double> c;
    std::vector<ScalarField> t;
    for (int i = 0; i < dim; ++i) {
      if (X[i].is_zero()) continue;
      if (std::find(J.begin(), J.end(), i) != J.end()) continue;
      merged.assign(1, i);
      merged.insert(merged.end(), J.begin(), J.end());
      const int sign = sort_sign(merged);
      const ScalarField& coef = a.at(merged);
      if (coef.is_zero()) continue;
      c.push_back(sign);
      t.push_back(X[i] * coef);
    }
    out.push_back(linear_combination(c, t));
  }
  return DifferentialForm(dim, a.degree() - 1, std::move(out));
}

DifferentialForm lie_derivative(const VectorField& X, const DifferentialForm& a) {
  check_same_dim(X.dim(), a.dim());
  if (a.degree() == 0) return DifferentialForm::function(a.dim(), X.apply(a.coeff(0)));
  DifferentialForm out = exterior_d(interior_product(X, a));
  if (a.degree() < a.dim()) out += interior_product(X, exterior_d(a));
  return out;
}

// --- ChartMap --------------------------------------------------------------

ChartMap::ChartMap(int source_dim, std::vector<ScalarField> components)
    : source_dim_(source_dim), comps_(std::move(components)) {
  if (source_dim < 1 || comps_.empty()) throw std::invalid_argument("invalid chart map");
}

ChartMap ChartMap::identity(int dim) { return ChartMap(dim, coordinates(dim)); }

Point ChartMap::operator()(const Point& p) const {
  if (p.dim() != source_dim_) throw std::invalid_argument("point dimension does not match the map");
  EvalContext ctx(p.coords());
  std::vector<double> out;
  for (const auto& c : comps_) out.push_back(c.value(ctx));
  return Point(std::move(out));
}

Eigen::MatrixXd ChartMap::jacobian(const Point& p) const {
  if (p.dim() != source_dim_) throw std::invalid_argument("point dimension does not match the map");
  EvalContext ctx(p.coords());
  Eigen::MatrixXd m(target_dim(), source_dim_);
  for (int r = 0; r < target_dim(); ++r) {
    Jet j = comps_[r].jet(ctx, 1);
    for (int c = 0; c < source_dim_; ++c) m(r, c) = j.d1(c);
  }
  return m;
}

ChartMap ChartMap::after(const ChartMap& inner) const {
  if (inner.target_dim() != source_dim_) throw std::invalid_argument("dimension mismatch in composition");
  std::vector<ScalarField> out;
  for (const auto& c : comps_) out.push_back(c.compose(inner.comps_));
  return ChartMap(inner.source_dim_, std::move(out));
}

namespace {

// Determinant of the minor of `jac` with the given rows and columns.
ScalarField minor_det(const std::vector<std::vector<ScalarField>>& jac, std::span<const int> rows,
                      std::span<const int> cols) {
  const std::size_t k = rows.size();
  if (k == 1) return jac[rows[0]][cols[0]];
  std::vector<double> c;
  std::vector<ScalarField> t;
  std::vector<int> sub_cols;
  for (std::size_t j = 0; j < k; ++j) {
    const ScalarField& e = jac[rows[0]][cols[j]];
    if (e.is_zero()) continue;
    sub_cols.clear();
    for (std::size_t q = 0; q < k; ++q)
      if (q != j) sub_cols.push_back(cols[q]);
    ScalarField m = minor_det(jac, rows.subspan(1), sub_cols);
    if (m.is_zero()) continue;
    c.push_back(j % 2 == 0 ? 1.0 : -1.0);
    t.push_back(e * m);
  }
  return linear_combination(c, t);
}

}  // namespace

DifferentialForm pullback(const ChartMap& map, const DifferentialForm& a) {
  if (map.target_dim() != a.dim()) {
    throw std::invalid_argument("pullback: map target dimension does not match the form");
  }
  const int s = map.source_dim();
  const int k = a.degree();
  std::vector<ScalarField> composed;
  for (const auto& c : a.coeffs()) composed.push_back(c.compose(map.components()));
  if (k == 0) return DifferentialForm(s, 0, std::move(composed));
  if (k > s) return DifferentialForm(s, k);
  std::vector<std::vector<ScalarField>> jac(map.target_dim(), std::vector<ScalarField>(s));
  for (int r = 0; r < map.target_dim(); ++r)
    for (int c = 0; c < s; ++c) jac[r][c] = map.components()[r].partial(c);
  const auto& src = index_sets(a.dim(), k);
  const auto& dst = index_sets(s, k);
  std::vector<ScalarField> out;
  for (const auto& J : dst) {
    std::vector<double> c;
    std::vector<ScalarField> t;
    for (std::size_t I = 0; I < src.size(); ++I) {
      if (composed[I].is_zero()) continue;
      ScalarField det = minor_det(jac, src[I], J);
      if (det.is_zero()) continue;
      c.push_back(1.0);
      t.push_back(composed[I] * det);
    }
    out.push_back(linear_combination(c, t));
  }
  return DifferentialForm(s, k, std::move(out));
}

VectorField differential_applied(const ChartMap& map, const VectorField& X) {
  if (X.dim() != map.source_dim()) throw std::invalid_argument("field dimension does not match the map");
  VectorField out(map.target_dim());
  for (int r = 0; r < map.target_dim(); ++r) {
    std::vector<ScalarField> t;
    for (int c = 0; c < map.source_dim(); ++c) {
      if (X[c].is_zero()) continue;
      ScalarField d = map.components()[r].partial(c);
      if (d.is_zero()) continue;
      t.push_back(d * X[c]);
    }
    std::vector<double> ones(t.size(), 1.0);
    out[r] = linear_combination(ones, t);
  }
  return out;
}

VectorField compose(const VectorField& X, const ChartMap& map) {
  if (X.dim() != map.target_dim()) throw std::invalid_argument("field dimension does not match the map");
  std::vector<ScalarField> out;
  for (const auto& c : X.components()) out.push_back(c.compose(map.components()));
  return VectorField(std::move(out));
}

}  // namespace lck::calc

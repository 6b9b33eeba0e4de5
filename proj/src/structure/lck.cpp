#include "lck/structure/lck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lck/calculus/errors.hpp"
#include "lck/manifolds/manifold.hpp"

namespace lck::st {

namespace {

using calc::EvalContext;

Eigen::MatrixXd j_matrix(int dim) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 0; j + 1 < dim; j += 2) {
    J(j + 1, j) = 1.0;
    J(j, j + 1) = -1.0;
  }
  return J;
}

// Full antisymmetric matrix of 2-form coefficients, Omega_ij = Omega(e_i, e_j).
std::vector<ScalarField> two_form_matrix(const DifferentialForm& omega) {
  if (omega.degree() != 2) throw std::invalid_argument("expected a 2-form");
  const int d = omega.dim();
  std::vector<ScalarField> m(d * d, ScalarField(0.0));
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      m[i * d + j] = omega.at({i, j});
      m[j * d + i] = -omega.at({i, j});
    }
  }
  return m;
}

// Value and first partials of a field matrix at the point of ctx; dM[l] = d_l M.
struct MatrixJet {
  Eigen::MatrixXd value;
  std::vector<Eigen::MatrixXd> d;
};

MatrixJet matrix_jet(const std::vector<ScalarField>& entries, int rows, int cols, EvalContext& ctx) {
  const int dim = ctx.dim();
  MatrixJet out{Eigen::MatrixXd(rows, cols), std::vector<Eigen::MatrixXd>(dim, Eigen::MatrixXd(rows, cols))};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const calc::Jet j = entries[r * cols + c].jet(ctx, 1);
      out.value(r, c) = j.value();
      for (int l = 0; l < dim; ++l) out.d[l](r, c) = j.d1(l);
    }
  }
  return out;
}

MatrixJet vector_jet(const std::vector<ScalarField>& comps, EvalContext& ctx) {
  return matrix_jet(comps, static_cast<int>(comps.size()), 1, ctx);
}

// Jacobian DX(i, k) = d_k X^i.
Eigen::MatrixXd jacobian(const MatrixJet& x) {
  const int d = static_cast<int>(x.d.size());
  Eigen::MatrixXd D(x.value.rows(), d);
  for (int k = 0; k < d; ++k) D.col(k) = x.d[k].col(0);
  return D;
}

std::vector<Eigen::MatrixXd> christoffel_from(const MatrixJet& g) {
  const int d = static_cast<int>(g.value.rows());
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(g.value);
  if (!lu.isInvertible()) throw NumericalError("singular metric");
  const Eigen::MatrixXd ginv = lu.inverse();
  // first kind: Gamma_{ij,l} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  std::vector<Eigen::MatrixXd> out(d, Eigen::MatrixXd::Zero(d, d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd first(d);
      for (int l = 0; l < d; ++l) first[l] = 0.5 * (g.d[i](j, l) + g.d[j](i, l) - g.d[l](i, j));
      const Eigen::VectorXd second = ginv * first;
      for (int k = 0; k < d; ++k) out[k](i, j) = second[k];
    }
  }
  return out;
}

// (nabla theta)_{ij} = d_i theta_j - Gamma^k_ij theta_k.
Eigen::MatrixXd nabla_one_form(const MatrixJet& g, const MatrixJet& theta) {
  const int d = static_cast<int>(g.value.rows());
  const auto gamma = christoffel_from(g);
  Eigen::MatrixXd out(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double s = theta.d[i](j, 0);
      for (int k = 0; k < d; ++k) s -= gamma[k](i, j) * theta.value(k, 0);
      out(i, j) = s;
    }
  }
  return out;
}

MatrixJet metric_jet(const HermitianMetric& g, EvalContext& ctx) {
  std::vector<ScalarField> entries;
  for (int i = 0; i < g.dim(); ++i) {
    for (int j = 0; j < g.dim(); ++j) entries.push_back(g.entry(i, j));
  }
  return matrix_jet(entries, g.dim(), g.dim(), ctx);
}

}  // namespace

HermitianMetric::HermitianMetric(const DifferentialForm& omega) : dim_(omega.dim()) {
  const auto W = two_form_matrix(omega);
  g_.resize(dim_ * dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      // J e_j = e_{j+1} for x-directions and -e_{j-1} for y-directions.
      g_[i * dim_ + j] = j % 2 == 0 ? W[i * dim_ + j + 1] : -W[i * dim_ + j - 1];
    }
  }
}

HermitianMetric HermitianMetric::euclidean(int dim) {
  return HermitianMetric(LCKStructure::flat(dim / 2).omega());
}

Eigen::MatrixXd HermitianMetric::matrix(const Point& p) const {
  EvalContext ctx(p.coords());
  Eigen::MatrixXd G(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) G(i, j) = g_[i * dim_ + j].value(ctx);
  }
  return G;
}

double HermitianMetric::operator()(const Point& p, std::span<const double> X, std::span<const double> Y) const {
  const Eigen::MatrixXd G = matrix(p);
  const Eigen::Map<const Eigen::VectorXd> x(X.data(), X.size()), y(Y.data(), Y.size());
  return x.dot(G * y);
}

double HermitianMetric::symmetry_residual(const Point& p) const {
  const Eigen::MatrixXd G = matrix(p);
  return (G - G.transpose()).cwiseAbs().maxCoeff();
}

double HermitianMetric::j_invariance_residual(const Point& p) const {
  const Eigen::MatrixXd G = matrix(p);
  const Eigen::MatrixXd J = j_matrix(dim_);
  return (J.transpose() * G * J - G).cwiseAbs().maxCoeff();
}

double HermitianMetric::min_eigenvalue(const Point& p) const {
  const Eigen::MatrixXd G = matrix(p);
  const Eigen::MatrixXd S = 0.5 * (G + G.transpose());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

LCKStructure::LCKStructure(DifferentialForm omega, DifferentialForm theta, const mfd::ModelManifold* manifold)
    : omega_(std::move(omega)), theta_(std::move(theta)), manifold_(manifold) {
  if (omega_.degree() != 2 || theta_.degree() != 1 || omega_.dim() != theta_.dim() || omega_.dim() % 2 != 0) {
    throw std::invalid_argument("an LCK structure needs a 2-form and a 1-form on the same even-dimensional chart");
  }
}

LCKStructure LCKStructure::of(const mfd::ModelManifold& m) {
  if (!m.Omega || !m.theta) throw std::invalid_argument(m.id + " carries no LCK structure");
  return LCKStructure(*m.Omega, *m.theta, &m);
}

LCKStructure LCKStructure::flat(int n) {
  const int d = 2 * n;
  DifferentialForm omega(d, 2);
  for (int j = 0; j < n; ++j) omega += DifferentialForm::basis(d, {2 * j, 2 * j + 1});
  return LCKStructure(omega, DifferentialForm(d, 1));
}

const HermitianMetric& LCKStructure::metric() const {
  if (!metric_) metric_ = std::make_shared<HermitianMetric>(omega_);
  return *metric_;
}

const LeePair& LCKStructure::lee() const {
  if (!lee_) lee_ = std::make_shared<LeePair>(lee_vector_fields(*this));
  return *lee_;
}

StructureCheck check_structure(const LCKStructure& s, std::span<const Point> points) {
  StructureCheck out;
  out.d_theta = calc::sup_norm(calc::exterior_d(s.theta()), points);
  out.type_11 = calc::sup_norm(calc::apply_J_automorphism(s.omega()) - s.omega(), points);
  out.lck = lck_residual(s, points);
  out.min_positivity = std::numeric_limits<double>::infinity();
  for (const auto& p : points) out.min_positivity = std::min(out.min_positivity, s.metric().min_eigenvalue(p));
  return out;
}

double lck_residual(const LCKStructure& s, std::span<const Point> points) {
  return calc::sup_norm(calc::exterior_d(s.omega()) - calc::wedge(s.theta(), s.omega()), points);
}

LeeExtraction extract_lee_form(const DifferentialForm& omega, std::span<const Point> points) {
  const int d = omega.dim();
  if (d <= 2) throw std::invalid_argument("Lee form underdetermined on curves");
  const DifferentialForm domega = calc::exterior_d(omega);
  std::vector<DifferentialForm> columns;
  for (int k = 0; k < d; ++k) columns.push_back(calc::wedge(DifferentialForm::basis(d, {k}), omega));
  LeeExtraction out;
  for (const auto& p : points) {
    EvalContext ctx(p.coords());
    const auto rhs_v = domega.values(ctx);
    Eigen::MatrixXd M(rhs_v.size(), d);
    for (int k = 0; k < d; ++k) {
      const auto c = columns[k].values(ctx);
      for (std::size_t r = 0; r < c.size(); ++r) M(r, k) = c[r];
    }
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(rhs_v.data(), rhs_v.size());
    const Eigen::VectorXd theta = M.colPivHouseholderQr().solve(rhs);
    const double res = (M * theta - rhs).cwiseAbs().maxCoeff();
    out.theta.emplace_back(theta.data(), theta.data() + d);
    out.residuals.push_back(res);
    out.max_residual = std::max(out.max_residual, res);
  }
  return out;
}

LeePair lee_vector_fields(const LCKStructure& s) {
  const int d = s.dim();
  const auto W = two_form_matrix(s.omega());
  // (i_B Omega)_j = sum_i B^i Omega_ij, so the system matrix is Omega^t.
  std::vector<ScalarField> M(d * d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) M[j * d + i] = W[i * d + j];
  }
  const DifferentialForm jtheta = calc::apply_J(s.theta());
  VectorField B(calc::linear_solve(M, jtheta.coeffs()));
  VectorField A = B.J();
  return {std::move(B), std::move(A)};
}

double lee_pair_residual(const LCKStructure& s, std::span<const Point> points) {
  const LeePair& lee = s.lee();
  const DifferentialForm jtheta = calc::apply_J(s.theta());
  double worst = calc::sup_norm(calc::interior_product(lee.B, s.omega()) - jtheta, points);
  worst = std::max(worst, calc::sup_norm(calc::interior_product(lee.A, s.omega()) + s.theta(), points));
  for (const auto& p : points) {
    const auto jb = calc::apply_J(lee.B.values(p));
    const auto a = lee.A.values(p);
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - jb[k]));
  }
  return worst;
}

std::vector<Eigen::MatrixXd> christoffel(const HermitianMetric& g, const Point& p) {
  EvalContext ctx(p.coords());
  return christoffel_from(metric_jet(g, ctx));
}

std::vector<double> covariant_derivative(const HermitianMetric& g, const VectorField& X, const VectorField& Y,
                                         const Point& p) {
  EvalContext ctx(p.coords());
  const auto gamma = christoffel_from(metric_jet(g, ctx));
  const auto x = X.values(ctx);
  const MatrixJet y = vector_jet(Y.components(), ctx);
  const Eigen::MatrixXd DY = jacobian(y);
  const int d = g.dim();
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
  std::vector<double> out(d);
  for (int k = 0; k < d; ++k) out[k] = DY.row(k).dot(xv) + xv.dot(gamma[k] * y.value.col(0));
  return out;
}

double vaisman_residual(const LCKStructure& s, std::span<const Point> points) {
  double worst = 0.0;
  for (const auto& p : points) {
    EvalContext ctx(p.coords());
    const MatrixJet g = metric_jet(s.metric(), ctx);
    const MatrixJet theta = vector_jet(s.theta().coeffs(), ctx);
    worst = std::max(worst, nabla_one_form(g, theta).cwiseAbs().maxCoeff());
  }
  return worst;
}

double gauduchon_residual(const LCKStructure& s, std::span<const Point> points) {
  const int d = s.dim();
  double worst = 0.0;
  for (const auto& p : points) {
    EvalContext ctx(p.coords());
    const MatrixJet g = metric_jet(s.metric(), ctx);
    const MatrixJet theta = vector_jet(s.theta().coeffs(), ctx);
    const Eigen::MatrixXd nabla = nabla_one_form(g, theta);
    // Gram-Schmidt on the coordinate frame.
    Eigen::MatrixXd E = Eigen::MatrixXd::Identity(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < a; ++b) E.col(a) -= E.col(b).dot(g.value * E.col(a)) * E.col(b);
      E.col(a) /= std::sqrt(E.col(a).dot(g.value * E.col(a)));
    }
    double codiff = 0.0;
    for (int a = 0; a < d; ++a) codiff -= E.col(a).dot(nabla * E.col(a));
    worst = std::max(worst, std::abs(codiff));
  }
  return worst;
}

double holomorphy_residual(const VectorField& X, std::span<const Point> points) {
  const Eigen::MatrixXd J = j_matrix(X.dim());
  double worst = 0.0;
  for (const auto& p : points) {
    EvalContext ctx(p.coords());
    const Eigen::MatrixXd DX = jacobian(vector_jet(X.components(), ctx));
    worst = std::max(worst, (J * DX - DX * J).cwiseAbs().maxCoeff());
  }
  return worst;
}

double killing_residual(const HermitianMetric& g, const VectorField& X, std::span<const Point> points) {
  double worst = 0.0;
  for (const auto& p : points) {
    EvalContext ctx(p.coords());
    const MatrixJet G = metric_jet(g, ctx);
    const MatrixJet x = vector_jet(X.components(), ctx);
    const Eigen::MatrixXd DX = jacobian(x);
    Eigen::MatrixXd L = DX.transpose() * G.value + G.value * DX;
    for (int l = 0; l < g.dim(); ++l) L += x.value(l, 0) * G.d[l];
    worst = std::max(worst, L.cwiseAbs().maxCoeff());
  }
  return worst;
}

double potential_residual(const LCKStructure& s, const ScalarField& f, std::span<const Point> points) {
  const DifferentialForm F = DifferentialForm::function(s.dim(), f);
  const DifferentialForm ddc =
      calc::twisted_d(calc::twisted_d(F, s.theta(), true), s.theta(), false);
  return calc::sup_norm(s.omega() - ddc, points);
}

LCKStructure conformal_rescale(const LCKStructure& s, const ScalarField& h) {
  const DifferentialForm dh = calc::exterior_d(DifferentialForm::function(s.dim(), h));
  return LCKStructure(calc::exp(h) * s.omega(), s.theta() + dh, s.manifold());
}

LCKStructure conformal_divide(const LCKStructure& s, const ScalarField& f, std::span<const Point> probes) {
  for (const auto& p : probes) {
    if (!(f(p) > 0.0)) throw NumericalError("nonpositive conformal factor", {p.coords().begin(), p.coords().end()});
  }
  const DifferentialForm dlog = calc::exterior_d(DifferentialForm::function(s.dim(), calc::log(f)));
  return LCKStructure((1.0 / f) * s.omega(), s.theta() - dlog, s.manifold());
}

PotVReport verify_potV(const LCKStructure& s, std::span<const Point> points, double tol) {
  PotVReport r;
  const DifferentialForm jtheta = calc::apply_J(s.theta());
  const DifferentialForm shape = -calc::exterior_d(jtheta) + calc::wedge(s.theta(), jtheta);
  r.shape = calc::sup_norm(s.omega() - shape, points);
  r.holomorphy = holomorphy_residual(s.lee().B, points);
  r.hypotheses_met = r.shape < tol && r.holomorphy < tol;
  if (!r.hypotheses_met) {
    r.verdict = "hypotheses not met";
    return r;
  }
  double defect = 0.0;
  for (const auto& p : points) {
    const auto b = s.lee().B.values(p);
    defect = std::max(defect, std::abs(s.metric()(p, b, b) - 1.0));
  }
  r.norm_defect = defect;
  r.vaisman = vaisman_residual(s, points);
  const double conclusion_tol = std::max(tol, 1e-6);
  r.conclusion_holds = *r.norm_defect < conclusion_tol && *r.vaisman < conclusion_tol;
  r.verdict = r.conclusion_holds ? "Vaisman" : "conclusion fails";
  return r;
}

}  // namespace lck::st

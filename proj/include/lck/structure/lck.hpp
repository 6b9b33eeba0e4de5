#pragma once

// Locally conformally Kaehler structures (Omega, theta) with dOmega = theta ^ Omega
// on the universal cover, and pointwise verifiers built on exact jets.

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lck/calculus/forms.hpp"

namespace lck::mfd {
struct ModelManifold;
}

namespace lck::st {

using calc::DifferentialForm;
using calc::Point;
using calc::ScalarField;
using calc::VectorField;

// g(X, Y) = Omega(X, JY).
class HermitianMetric {
 public:
  explicit HermitianMetric(const DifferentialForm& omega);
  static HermitianMetric euclidean(int dim);

  int dim() const { return dim_; }
  const ScalarField& entry(int i, int j) const { return g_[i * dim_ + j]; }
  Eigen::MatrixXd matrix(const Point& p) const;
  double operator()(const Point& p, std::span<const double> X, std::span<const double> Y) const;

  // max |g - g^t|, max |J^t g J - g| and the smallest eigenvalue of g at p.
  double symmetry_residual(const Point& p) const;
  double j_invariance_residual(const Point& p) const;
  double min_eigenvalue(const Point& p) const;

 private:
  int dim_;
  std::vector<ScalarField> g_;
};

struct LeePair {
  VectorField B;
  VectorField A;
};

class LCKStructure {
 public:
  LCKStructure(DifferentialForm omega, DifferentialForm theta, const mfd::ModelManifold* manifold = nullptr);
  static LCKStructure of(const mfd::ModelManifold& m);
  // Sum_j dx_j ^ dy_j with theta = 0.
  static LCKStructure flat(int n);

  const DifferentialForm& omega() const { return omega_; }
  const DifferentialForm& theta() const { return theta_; }
  const mfd::ModelManifold* manifold() const { return manifold_; }
  int dim() const { return omega_.dim(); }
  int n() const { return omega_.dim() / 2; }

  const HermitianMetric& metric() const;
  // B and A = JB with i_B Omega = J theta and i_A Omega = -theta.
  const LeePair& lee() const;

 private:
  DifferentialForm omega_;
  DifferentialForm theta_;
  const mfd::ModelManifold* manifold_;
  mutable std::shared_ptr<HermitianMetric> metric_;
  mutable std::shared_ptr<LeePair> lee_;
};

struct StructureCheck {
  double d_theta = 0.0;       // max |d theta|
  double min_positivity = 0.0;  // min Omega(X, JX) over unit coordinate-frame X
  double type_11 = 0.0;       // max |J Omega - Omega|
  double lck = 0.0;           // lck_residual
};
StructureCheck check_structure(const LCKStructure& s, std::span<const Point> points);

// max over points of the max-abs coefficient of dOmega - theta ^ Omega.
double lck_residual(const LCKStructure& s, std::span<const Point> points);

struct LeeExtraction {
  std::vector<std::vector<double>> theta;  // coefficients at each point
  std::vector<double> residuals;           // least-squares residual at each point
  double max_residual = 0.0;
  bool is_lck(double tol = 1e-8) const { return max_residual <= tol; }
};
// Solves dOmega = theta ^ Omega for theta at each point by least squares.
// Throws std::invalid_argument on complex curves.
LeeExtraction extract_lee_form(const DifferentialForm& omega, std::span<const Point> points);

LeePair lee_vector_fields(const LCKStructure& s);
// max over points of |i_B Omega - J theta|, |i_A Omega + theta| and |A - JB|.
double lee_pair_residual(const LCKStructure& s, std::span<const Point> points);

// Levi-Civita derivative nabla_X Y at p.
std::vector<double> covariant_derivative(const HermitianMetric& g, const VectorField& X, const VectorField& Y,
                                         const Point& p);
// Christoffel symbols Gamma^k_ij at p, indexed [k][i][j].
std::vector<Eigen::MatrixXd> christoffel(const HermitianMetric& g, const Point& p);

// max |(nabla_i theta)_j| over points and coordinate-frame pairs.
double vaisman_residual(const LCKStructure& s, std::span<const Point> points);
// max |d^* theta| over points.
double gauduchon_residual(const LCKStructure& s, std::span<const Point> points);
// max |L_X J| over points, via [X, J d_k] - J[X, d_k].
double holomorphy_residual(const VectorField& X, std::span<const Point> points);
// max |(L_X g)(d_i, d_j)| over points.
double killing_residual(const HermitianMetric& g, const VectorField& X, std::span<const Point> points);
// max |Omega - d_theta d^c_theta f| over points.
double potential_residual(const LCKStructure& s, const ScalarField& f, std::span<const Point> points);

// (e^h Omega, theta + dh).
LCKStructure conformal_rescale(const LCKStructure& s, const ScalarField& h);
// (Omega / f, theta - d ln f); throws if f <= 0 at one of the probes.
LCKStructure conformal_divide(const LCKStructure& s, const ScalarField& f, std::span<const Point> probes);

struct PotVReport {
  double shape = 0.0;        // |Omega - (-dJtheta + theta ^ Jtheta)|
  double holomorphy = 0.0;   // holomorphy_residual(B)
  std::optional<double> norm_defect;  // max | |B|^2 - 1 |
  std::optional<double> vaisman;
  bool hypotheses_met = false;
  bool conclusion_holds = false;
  std::string verdict;
};
PotVReport verify_potV(const LCKStructure& s, std::span<const Point> points, double tol = 1e-8);

}  // namespace lck::st

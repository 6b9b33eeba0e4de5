#pragma once

// Compact torus actions generated by commuting periodic flows: averaging,
// the dimension of t ∩ Jt, vertical/horizontal labels and existence verdicts.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "lck/manifolds/manifold.hpp"
#include "lck/structure/lck.hpp"

namespace lck::torus {

using calc::DifferentialForm;
using calc::Point;
using calc::VectorField;
using mfd::FlowMap;
using mfd::ModelManifold;

class TorusAction {
 public:
  // Generators named in `names` (default: the fixture's torus), all periodic.
  static TorusAction of(const ModelManifold& m, std::vector<std::string> names = {});

  const ModelManifold& manifold() const { return *manifold_; }
  const std::vector<FlowMap>& circles() const { return circles_; }
  int size() const { return static_cast<int>(coeffs_.rows()); }
  const std::string& name(int i) const { return names_[i]; }
  // generator i = sum_j coeffs(i, j) * circle j
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  VectorField generator(int i) const;

  // Same torus, generators replaced by R * (current generators).
  TorusAction recombined(const Eigen::MatrixXd& R) const;

  // max |[xi_i, xi_j]| and max |Phi_period - closure| over points.
  double commutation_residual(std::span<const Point> points) const;
  double period_residual(std::span<const Point> points) const;

 private:
  const ModelManifold* manifold_ = nullptr;
  std::vector<FlowMap> circles_;
  std::vector<std::string> names_;
  Eigen::MatrixXd coeffs_;
};

// Trapezoidal average of a over every circle factor, one factor after another.
DifferentialForm average_over_action(const DifferentialForm& a, const TorusAction& act, int nodes = 16);

// dim(t ∩ Jt) = 2k - rank[Xi | J Xi], checked to be the same at every point.
int intersection_dimension(const TorusAction& act, std::span<const Point> points);

struct GeneratorPairing {
  std::string name;
  double pairing = 0.0;  // averaged theta(xi), mean over points
  double spread = 0.0;   // max - min over points
  bool vertical = false;
};
std::vector<GeneratorPairing> classify_vertical(const TorusAction& act, const DifferentialForm& theta,
                                                std::span<const Point> points, int nodes = 16);

enum class Verdict { NoLCKPossible, VaismanExists, PositivePotentialExists, PurelyReal, Inconclusive };
std::string verdict_name(Verdict v);

struct ActionReport {
  int intersection_dim = -1;
  std::vector<GeneratorPairing> pairings;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> witnesses;
};
ActionReport verdict(const TorusAction& act, const st::LCKStructure* s, std::span<const Point> points,
                     int nodes = 16);

// max |Omega(xi_i, xi_j)| over pairs and points; only for horizontal actions.
double isotropy_residual(const TorusAction& act, const st::LCKStructure& s, std::span<const Point> points,
                         int nodes = 16);

}  // namespace lck::torus

#pragma once

// Constructive potentials: the periodic first-order ODE along a periodic Lee
// flow, the perturbed structure Omega + f theta ^ J theta built on it, and the
// orbit-averaged Kaehler potential along the flow of JC.

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lck/manifolds/manifold.hpp"
#include "lck/structure/lck.hpp"

namespace lck::pot {

using calc::DifferentialForm;
using calc::Point;
using calc::ScalarField;
using calc::VectorField;
using mfd::ModelManifold;

class InadmissibleF : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A smooth 2pi-periodic function of one variable with Taylor access.
class PeriodicFunction {
 public:
  using Taylor = std::function<void(double t, int order, std::span<double> out)>;
  PeriodicFunction(std::string label, Taylor taylor);
  // `primitive` gives the Taylor coefficients of t -> int_0^t f when known in closed form.
  PeriodicFunction(std::string label, Taylor taylor, Taylor primitive);

  static PeriodicFunction constant(double k);
  static PeriodicFunction cosine(double eps);
  // a0 + sum_k a[k-1] cos(kt) + b[k-1] sin(kt)
  static PeriodicFunction trigonometric(double a0, std::vector<double> a, std::vector<double> b);
  // "const:k" or "cos:eps".
  static PeriodicFunction parse(const std::string& spec);

  const std::string& label() const { return label_; }
  PeriodicFunction relabel(std::string label) const;
  double operator()(double t) const;
  double derivative(double t, int k = 1) const;
  // out[k] = f^(k)(t) / k!
  void taylor(double t, int order, std::span<double> out) const;
  // f o t as a field.
  ScalarField of(const ScalarField& t) const;
  // max |f(t + 2pi) - f(t)| over probes.
  double periodicity_residual(int probes = 64) const;
  // min f over `grid` equispaced points of one period.
  double grid_min(int grid = 1024) const;
  // t -> int_0^t f as a field of t, by quadrature unless a closed form was given.
  ScalarField primitive_of(const ScalarField& t) const;

 private:
  std::string label_;
  std::shared_ptr<const calc::UnivariateFunction> impl_;
  std::shared_ptr<const calc::UnivariateFunction> primitive_;
};

struct PotentialSolution {
  PeriodicFunction f;
  PeriodicFunction g;
  double a = 0.0;
  double b = 0.0;
  double K = 0.0;
  double c = 0.0;
  double periodicity = 0.0;   // |g(2pi) - g(0)|
  double first_order = 0.0;   // max |g' - g(1+f) + 1|, g' by finite differences
  double second_order = 0.0;  // max |g'' - 2(1+f)g' - g f' + g(1+f)^2 - (1+f)|
  double min_g = 0.0;
  double t_min = 0.0;
  int nodes = 0;
};

// F(t) = a + int_0^t (f+1), b = F(2pi) - a, K = int_0^2pi e^-F, c = K e^b/(e^b-1),
// g(t) = (c - int_0^t e^-F) e^F(t). Throws InadmissibleF when f <= -1 on the grid
// and NumericalError when the quadrature does not converge.
PotentialSolution solve_periodic_first_order(const PeriodicFunction& f, double a = 0.0, int nodes = 512);

// g_t = int_0^t sin(t - s) f(s) ds by composite Simpson with `nodes` intervals.
double duhamel_g(const std::function<double(double)>& f, double t, int nodes);
// |g'' + g - f| at t, with g'' by central second differences of duhamel_g.
double duhamel_residual(const std::function<double(double)>& f, double t, int nodes, double h = 1e-3);

// Omega' = Omega + f theta ^ J theta with Lee form (1+f) theta, where f is a
// function of the orbit parameter phi of the Lee field B, and g(phi) its potential.
struct Leeolo {
  ModelManifold manifold;
  PotentialSolution potential;
  ScalarField f;  // f o phi
  ScalarField g;  // g o phi
  VectorField B;  // Lee field of the base
  st::LCKStructure structure() const { return st::LCKStructure(*manifold.Omega, *manifold.theta, &manifold); }
};
// Requires the base Lee field to be a unit field with a 2pi-periodic flow "B".
Leeolo build_leeolo(const ModelManifold& base, const PeriodicFunction& f, int nodes = 512);
// "leeolo:eps=0.3": f = eps cos on hopf_diag with beta = e^-pi.
Leeolo leeolo_fixture(const std::string& id);

struct LeeoloReport {
  double lck = 0.0;          // |dOmega' - (1+f) theta ^ Omega'|
  double lee_field = 0.0;    // |B' - B|
  double norm = 0.0;         // | |B|^2_{Omega'} - (1+f) |
  double potential = 0.0;    // |Omega' - d_theta' d^c_theta' g|
  double f_colinear = 0.0;   // |df - f'(phi) theta|
  double min_eigenvalue = 0.0;
};
LeeoloReport verify_leeolo(const Leeolo& l, std::span<const Point> points);

// Model manifold with both fixture ids of the gallery and "leeolo".
ModelManifold fixture(const std::string& id);
std::vector<std::string> fixture_ids();

struct OrbitOptions {
  int nodes = 256;           // averaging intervals per 2pi
  int duhamel_nodes = 256;   // Simpson intervals for g_t
  int periods = 1;           // average over [0, 2pi n]
  std::vector<double> probe_times = {0.5, 1.0, 2.7};
};

struct OrbitReport {
  double equivariance = 0.0;  // |L_C omega + omega|
  double theta_C = 0.0;       // |theta(C) - 1|
  double min_f = 0.0;         // min omega(C, JC)
  std::vector<double> omega5;  // per probe time
  double min_g = 0.0;
  double average_consistency = 0.0;  // |g - mean of duhamel g_t|
  double deck_invariance = 0.0;      // Omega' under the deck group
  double loop_periods = 0.0;         // |int theta' - int theta| over deck loops
  double lck = 0.0;
  double potential = 0.0;     // |Omega' - d_theta' d^c_theta' 1|
  double min_eigenvalue = 0.0;
  double omega5_max() const;
};

struct OrbitResult {
  std::string jc_flow;
  ScalarField f;  // omega(C, JC)
  ScalarField g;
  DifferentialForm omega_prime;  // g^-1 dd^c g
  DifferentialForm theta_prime;  // -d ln g
  OrbitReport report;
};

// `omega` is the Kaehler lift on the cover with L_C omega = -omega; JC must
// be the generator of a registered flow of `cover`. Throws std::invalid_argument
// when theta(C) != 1 or omega(C, JC) <= 0 at a probe, NumericalError when the
// averaged potential is not positive.
OrbitResult orbit_average_potential(const ModelManifold& cover, const DifferentialForm& omega, const VectorField& C,
                                    std::span<const Point> probes, const OrbitOptions& opt = {});

// Structure averaged over the named circles, with its Kaehler lift.
struct AveragedStructure {
  DifferentialForm Omega;
  DifferentialForm theta;
  ScalarField phi;
  DifferentialForm kahler;  // e^-phi Omega
};
AveragedStructure average_structure(const ModelManifold& m, const std::vector<std::string>& circles, int nodes);

}  // namespace lck::pot

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lck/calculus/complex.hpp"
#include "lck/calculus/forms.hpp"

namespace lck::mfd {

using calc::ChartMap;
using calc::DifferentialForm;
using calc::Point;
using calc::ScalarField;
using calc::VectorField;

struct DeckTransformation {
  std::string name;
  ChartMap map;
  // gamma^* Omega_K = rho^{-1} Omega_K for the Kaehler lift of the fixture.
  double rho = 1.0;
};

// Builds the flow components from a time field t and the coordinate fields.
// Passing a constant t gives the time-t map; passing an extra coordinate gives
// the space-time map.
using FlowBuilder =
    std::function<std::vector<ScalarField>(const ScalarField& t, const std::vector<ScalarField>& x)>;

class FlowMap {
 public:
  FlowMap(std::string name, VectorField generator, FlowBuilder builder, std::optional<double> period = {},
          std::optional<int> closure = {});

  const std::string& name() const { return name_; }
  const VectorField& generator() const { return generator_; }
  int dim() const { return generator_.dim(); }
  std::optional<double> period() const { return period_; }
  // Deck generator index equal to the time-`period` map; -1 means identity.
  std::optional<int> closure() const { return closure_; }

  ChartMap at(double t) const;
  // Map (x, t) -> Phi_t(x) with dim() + 1 inputs.
  ChartMap spacetime() const;
  Point operator()(double t, const Point& p) const;
  const FlowBuilder& builder() const { return builder_; }

 private:
  std::string name_;
  VectorField generator_;
  FlowBuilder builder_;
  std::optional<double> period_;
  std::optional<int> closure_;
};

using Sampler = std::function<std::vector<Point>(int count, std::uint64_t seed)>;

struct ModelManifold {
  std::string id;
  int n = 0;  // complex dimension
  std::function<bool(const Point&)> contains;
  std::vector<DeckTransformation> deck;
  // Cover potential with p^* theta = d phi.
  ScalarField phi;
  Sampler sampler;
  std::map<std::string, FlowMap> flows;
  std::map<std::string, VectorField> fields;
  std::map<std::string, ScalarField> scalars;
  std::map<std::string, double> constants;
  // Canonical LCK structure on the cover, when the fixture provides one.
  std::optional<DifferentialForm> Omega;
  std::optional<DifferentialForm> theta;
  // Generators of the fixture's torus, by flow name.
  std::vector<std::string> torus;

  int dim() const { return 2 * n; }
  const FlowMap& flow(const std::string& name) const;
  const VectorField& field(const std::string& name) const;
  double constant(const std::string& name) const;
  // e^{-phi} Omega.
  DifferentialForm kahler_lift() const;
};

// Parses ids such as "hopf_diag:n=2,beta=0.5". Throws UnknownFixture or
// std::invalid_argument.
ModelManifold gallery(const std::string& id);
std::vector<std::string> gallery_ids();

class UnknownFixture : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FixtureId {
  std::string name;
  std::map<std::string, std::string> params;
  static FixtureId parse(const std::string& id);
  double number(const std::string& key, double fallback) const;
  calc::cplx complex_number(const std::string& key, calc::cplx fallback) const;
};

std::vector<Point> sample_points(const ModelManifold& m, int count, std::uint64_t seed);

// max over deck generators and points of |gamma^* a - a|.
double invariance_residual(const ModelManifold& m, const DifferentialForm& a, std::span<const Point> points);
// max over deck generators and points of |gamma^* a - rho(gamma)^{-1} a|.
double equivariance_residual(const ModelManifold& m, const DifferentialForm& a, std::span<const Point> points);
// max over deck generators and points of |gamma_* X - X o gamma|.
double deck_quotient_check(const ModelManifold& m, const VectorField& X, std::span<const Point> points);
// max over deck generators and points of |D gamma J - J D gamma|.
double deck_holomorphy_residual(const ModelManifold& m, std::span<const Point> points);

const FlowMap& flow_of(const ModelManifold& m, const std::string& field);
// |Phi_{s+t} - Phi_s o Phi_t| over points.
double flow_group_residual(const FlowMap& f, double s, double t, std::span<const Point> points);
// |d/dt Phi_t - X o Phi_t| over points, exact in t.
double flow_generator_residual(const FlowMap& f, double t, std::span<const Point> points);
// |Phi_period - closure| over points (closure is a deck generator or the identity).
double flow_closure_residual(const ModelManifold& m, const FlowMap& f, std::span<const Point> points);

// Integral of a 1-form along the straight segment p -> q (Gauss-Legendre).
double segment_integral(const DifferentialForm& a, const Point& p, const Point& q, int nodes = 24);
// Integral of a closed 1-form from p to gamma(p) for each deck generator: the
// period of the form on the loop that gamma represents.
std::vector<double> deck_loop_integrals(const ModelManifold& m, const DifferentialForm& a, const Point& p,
                                        int nodes = 24);

}  // namespace lck::mfd

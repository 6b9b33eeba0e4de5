#include <algorithm>
#include <cmath>
#include <sstream>

#include "lck/calculus/errors.hpp"
#include "lck/potential/potential.hpp"

namespace lck::pot {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

PeriodicFunction derivative(const PeriodicFunction& f) {
  return PeriodicFunction(f.label() + "'", [f](double t, int order, std::span<double> out) {
    std::vector<double> c(order + 2);
    f.taylor(t, order + 1, c);
    for (int k = 0; k <= order; ++k) out[k] = c[k + 1] * (k + 1);
  });
}

// |df - f'(t) dt| with t the orbit parameter.
double colinearity(const Leeolo& l, std::span<const Point> points) {
  const ScalarField& t = l.manifold.scalars.at("t");
  const int dim = l.manifold.dim();
  const DifferentialForm dt = calc::exterior_d(DifferentialForm::function(dim, t));
  const DifferentialForm df = calc::exterior_d(DifferentialForm::function(dim, l.f));
  return calc::sup_norm(df - derivative(l.potential.f).of(t) * dt, points);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Leeolo build_leeolo(const ModelManifold& base, const PeriodicFunction& f, int nodes) {
  if (!base.Omega || !base.theta) throw std::invalid_argument(base.id + " has no LCK structure to perturb");
  if (!base.flows.count("B")) throw std::invalid_argument(base.id + " registers no Lee flow B");
  const mfd::FlowMap& flowB = base.flow("B");
  const auto probes = mfd::sample_points(base, 32, 1);
  if (!flowB.period() || std::abs(*flowB.period() - kTwoPi) > 1e-9 ||
      mfd::flow_closure_residual(base, flowB, probes) > 1e-9) {
    std::ostringstream msg;
    msg << "the flow of B on " << base.id << " is not 2pi-periodic";
    if (flowB.period()) msg << " (period " << *flowB.period() << ")";
    throw std::invalid_argument(msg.str());
  }
  const st::LCKStructure s(*base.Omega, *base.theta, &base);
  const VectorField& B = flowB.generator();
  for (const auto& p : probes) {
    const auto b = B.values(p);
    if (std::abs(s.metric()(p, b, b) - 1.0) > 1e-9) throw std::invalid_argument("the base Lee field is not a unit field");
  }

  Leeolo l{base, solve_periodic_first_order(f, 0.0, nodes), f.of(base.phi), ScalarField(), B};
  l.g = l.potential.g.of(base.phi);
  const DifferentialForm& theta = *base.theta;
  l.manifold.Omega = *base.Omega + l.f * calc::wedge(theta, calc::apply_J(theta));
  l.manifold.theta = (1.0 + l.f) * theta;
  l.manifold.phi = base.phi + f.primitive_of(base.phi);
  double mean = 0.0;
  for (int i = 0; i < nodes; ++i) mean += f(kTwoPi * i / nodes);
  mean /= nodes;
  for (auto& d : l.manifold.deck) d.rho = std::exp(std::log(d.rho) * (1.0 + mean));
  l.manifold.id = "leeolo[" + base.id + ";" + f.label() + "]";
  l.manifold.scalars["t"] = base.phi;
  l.manifold.scalars["f"] = l.f;
  l.manifold.scalars["g"] = l.g;

  if (colinearity(l, probes) > 1e-8) throw std::invalid_argument("df is not colinear with theta");
  return l;
}

Leeolo leeolo_fixture(const std::string& id) {
  const auto fid = mfd::FixtureId::parse(id);
  if (fid.name != "leeolo") throw mfd::UnknownFixture("unknown fixture '" + fid.name + "'");
  for (const auto& [k, v] : fid.params) {
    if (k != "eps") throw std::invalid_argument("leeolo: unknown parameter '" + k + "'");
  }
  const double eps = fid.number("eps", 0.3);
  std::ostringstream beta;
  beta.precision(17);
  beta << std::exp(-M_PI);
  const ModelManifold base = mfd::gallery("hopf_diag:n=2,beta=" + beta.str());
  Leeolo l = build_leeolo(base, PeriodicFunction::cosine(eps));
  l.manifold.id = "leeolo:eps=" + (fid.params.count("eps") ? fid.params.at("eps") : std::string("0.3"));
  l.manifold.constants["eps"] = eps;
  return l;
}

LeeoloReport verify_leeolo(const Leeolo& l, std::span<const Point> points) {
  LeeoloReport r;
  const st::LCKStructure s = l.structure();
  r.lck = st::lck_residual(s, points);
  const VectorField Bp = s.lee().B;
  r.f_colinear = colinearity(l, points);
  r.min_eigenvalue = INFINITY;
  for (const auto& p : points) {
    const auto b = l.B.values(p);
    const auto bp = Bp.values(p);
    std::vector<double> diff(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) diff[i] = bp[i] - b[i];
    r.lee_field = std::max(r.lee_field, max_abs(diff));
    r.norm = std::max(r.norm, std::abs(s.metric()(p, b, b) - (1.0 + l.f(p))));
    r.min_eigenvalue = std::min(r.min_eigenvalue, s.metric().min_eigenvalue(p));
  }
  r.potential = st::potential_residual(s, l.g, points);
  return r;
}

ModelManifold fixture(const std::string& id) {
  if (mfd::FixtureId::parse(id).name == "leeolo") return leeolo_fixture(id).manifold;
  return mfd::gallery(id);
}

std::vector<std::string> fixture_ids() {
  auto ids = mfd::gallery_ids();
  ids.push_back("leeolo");
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace lck::pot

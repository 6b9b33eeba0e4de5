#include <algorithm>
#include <cmath>
#include <sstream>

#include "lck/calculus/errors.hpp"
#include "lck/potential/potential.hpp"
#include "lck/torus/torus.hpp"

namespace lck::pot {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Composite Simpson weights on [0, T] with n (even) intervals.
std::vector<double> simpson_weights(double T, int n) {
  std::vector<double> w(n + 1);
  const double h = T / n;
  for (int j = 0; j <= n; ++j) w[j] = h / 3.0 * ((j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0));
  return w;
}

const mfd::FlowMap& flow_generated_by(const ModelManifold& m, const VectorField& X, std::span<const Point> probes) {
  for (const auto& [name, flow] : m.flows) {
    double worst = 0.0, scale = 0.0;
    for (const auto& p : probes) {
      const auto a = flow.generator().values(p), b = X.values(p);
      for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
      }
    }
    if (worst <= 1e-12 * std::max(1.0, scale)) return flow;
  }
  throw std::invalid_argument("JC is not the generator of a registered flow of " + m.id);
}

std::string str(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

double OrbitReport::omega5_max() const {
  double m = 0.0;
  for (double v : omega5) m = std::max(m, v);
  return m;
}

OrbitResult orbit_average_potential(const ModelManifold& cover, const DifferentialForm& omega, const VectorField& C,
                                    std::span<const Point> probes, const OrbitOptions& opt) {
  if (opt.nodes < 256) throw std::invalid_argument("orbit averaging needs at least 256 nodes");
  if (opt.periods < 1) throw std::invalid_argument("orbit averaging needs a positive number of periods");
  if (!cover.theta) throw std::invalid_argument(cover.id + " has no Lee form");
  if (probes.empty()) throw std::invalid_argument("orbit averaging needs probe points");
  const int dim = cover.dim();
  const DifferentialForm thetaC = calc::interior_product(C, *cover.theta);
  double offset = 0.0;
  for (const auto& p : probes) offset = std::max(offset, std::abs(thetaC.coeff(0)(p) - 1.0));
  if (offset > 1e-8) throw std::invalid_argument("theta(C) != 1 (off by " + str(offset) + "); normalize C");
  const VectorField JC = C.J();
  const mfd::FlowMap& flow = flow_generated_by(cover, JC, probes);
  OrbitResult out{flow.name(), ScalarField(), ScalarField(), DifferentialForm(dim, 2), DifferentialForm(dim, 1), {}};
  OrbitReport& r = out.report;
  r.theta_C = offset;
  r.equivariance = calc::sup_norm(calc::lie_derivative(C, omega) + omega, probes);
  if (r.equivariance > 1e-7) {
    throw std::invalid_argument("omega is not C-equivariant: |L_C omega + omega| = " + str(r.equivariance));
  }

  const DifferentialForm eta = calc::interior_product(C, omega);
  out.f = calc::interior_product(JC, eta).coeff(0);
  r.min_f = INFINITY;
  for (const auto& p : probes) r.min_f = std::min(r.min_f, out.f(p));
  if (!(r.min_f > 0.0)) throw std::invalid_argument("omega(C, JC) is not positive at the probes");

  auto pulled = [&](double s) { return out.f.compose(flow.at(s).components()); };
  auto ddc = [dim](const ScalarField& u) {
    return calc::exterior_d(calc::dc(DifferentialForm::function(dim, u)));
  };

  // omega_t = cos t omega + sin t dJ eta + dd^c g_t along the flow of JC.
  const DifferentialForm dJeta = calc::exterior_d(calc::apply_J(eta));
  for (double t : opt.probe_times) {
    const int n = opt.duhamel_nodes + opt.duhamel_nodes % 2;
    const auto w = simpson_weights(t, n);
    std::vector<double> coeffs;
    std::vector<ScalarField> terms;
    for (int j = 0; j <= n; ++j) {
      const double s = t * j / n;
      const double c = w[j] * std::sin(t - s);
      if (c == 0.0) continue;
      coeffs.push_back(c);
      terms.push_back(pulled(s));
    }
    const ScalarField gt = calc::linear_combination(coeffs, terms);
    const DifferentialForm lhs = calc::pullback(flow.at(t), omega);
    const DifferentialForm rhs = std::cos(t) * omega + std::sin(t) * dJeta + ddc(gt);
    r.omega5.push_back(calc::sup_norm(lhs - rhs, probes));
  }

  // Mean of g_t over [0, T] equals (1/T) int_0^T (1 - cos s) f_s ds.
  const double T = kTwoPi * opt.periods;
  const int N = opt.nodes * opt.periods + (opt.nodes * opt.periods) % 2;
  const auto w = simpson_weights(T, N);
  std::vector<double> coeffs;
  std::vector<ScalarField> terms;
  for (int j = 0; j <= N; ++j) {
    const double s = T * j / N;
    const double c = w[j] * (1.0 - std::cos(s)) / T;
    if (c == 0.0) continue;
    coeffs.push_back(c);
    terms.push_back(pulled(s));
  }
  out.g = calc::linear_combination(coeffs, terms);

  r.min_g = INFINITY;
  for (const auto& p : probes) r.min_g = std::min(r.min_g, out.g(p));
  if (!(r.min_g > 0.0)) throw NumericalError("averaged potential is not positive");

  // The same mean taken literally: Simpson over t of Duhamel g_t(p), with the
  // inner integrals on a grid twice as fine as the outer one.
  const int checks = std::min<int>(2, static_cast<int>(probes.size()));
  const int outer = N;
  const auto wo = simpson_weights(T, outer);
  const double h = T / (2 * outer);
  for (int i = 0; i < checks; ++i) {
    const Point& p = probes[i];
    std::vector<double> samples(2 * outer + 1);
    for (int j = 0; j <= 2 * outer; ++j) samples[j] = out.f(flow(h * j, p));
    double mean = 0.0;
    for (int k = 1; k <= outer; ++k) {
      const double t = 2 * h * k;
      double gt = 0.0;
      for (int j = 0; j <= 2 * k; ++j) {
        const double wj = (j == 0 || j == 2 * k) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        gt += wj * std::sin(t - h * j) * samples[j];
      }
      mean += wo[k] * gt * h / 3.0;
    }
    r.average_consistency = std::max(r.average_consistency, std::abs(mean / T - out.g(p)));
  }

  out.omega_prime = (1.0 / out.g) * ddc(out.g);
  out.theta_prime = calc::exterior_d(DifferentialForm::function(dim, -calc::log(out.g)));
  const st::LCKStructure s(out.omega_prime, out.theta_prime, &cover);
  r.lck = st::lck_residual(s, probes);
  r.potential = st::potential_residual(s, ScalarField(1.0), probes);
  r.min_eigenvalue = INFINITY;
  for (const auto& p : probes) r.min_eigenvalue = std::min(r.min_eigenvalue, s.metric().min_eigenvalue(p));
  if (!cover.deck.empty()) {
    r.deck_invariance = mfd::invariance_residual(cover, out.omega_prime, probes);
    // theta' = -d ln g is exact on the cover, so its period on the loop of
    // gamma is ln g(p) - ln g(gamma p).
    for (int i = 0; i < checks; ++i) {
      const Point& p = probes[i];
      const auto b = mfd::deck_loop_integrals(cover, *cover.theta, p);
      for (std::size_t k = 0; k < cover.deck.size(); ++k) {
        const double a = std::log(out.g(p)) - std::log(out.g(cover.deck[k].map(p)));
        r.loop_periods = std::max(r.loop_periods, std::abs(a - b[k]));
      }
    }
  }
  return out;
}

AveragedStructure average_structure(const ModelManifold& m, const std::vector<std::string>& circles, int nodes) {
  if (!m.Omega || !m.theta) throw std::invalid_argument(m.id + " has no LCK structure");
  const auto act = torus::TorusAction::of(m, circles);
  // phi o Phi_T = phi o gamma = phi + ln rho(gamma), so phi o Phi_s - (s/T) ln rho
  // is periodic in s and its average is a potential of the averaged theta.
  ScalarField phi = m.phi;
  for (const auto& c : act.circles()) {
    const double T = *c.period();
    const double shift = *c.closure() >= 0 ? std::log(m.deck.at(*c.closure()).rho) : 0.0;
    std::vector<double> coeffs;
    std::vector<ScalarField> terms;
    for (int j = 0; j < nodes; ++j) {
      const double s = T * j / nodes;
      coeffs.push_back(1.0 / nodes);
      terms.push_back(phi.compose(c.at(s).components()) - s / T * shift);
    }
    phi = calc::linear_combination(coeffs, terms);
  }
  AveragedStructure a{torus::average_over_action(*m.Omega, act, nodes),
                      torus::average_over_action(*m.theta, act, nodes), phi, DifferentialForm(m.dim(), 2)};
  a.kahler = calc::exp(-a.phi) * a.Omega;
  return a;
}

}  // namespace lck::pot

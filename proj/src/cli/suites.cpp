#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "lck/calculus/errors.hpp"
#include "lck/cli/report.hpp"
#include "lck/potential/potential.hpp"
#include "lck/torus/torus.hpp"

namespace lck::cli {

namespace {

using calc::Point;
using calc::VectorField;
using mfd::ModelManifold;
using st::LCKStructure;

constexpr int kOrbitProbes = 4;
constexpr int kTorusPoints = 24;
constexpr int kAveragingNodes = 16;
// Along B the perturbation is cos(phi + s), so the smallest rule averages it exactly.
constexpr int kLeeCircleNodes = 8;
constexpr int kOrbitNodes = 256;
constexpr int kRecombinations = 10;
constexpr int kRecombinationPoints = 8;
constexpr int kRecombinationNodes = 8;

std::span<const Point> head(const std::vector<Point>& v, int n) {
  return std::span<const Point>(v).first(std::min<std::size_t>(n, v.size()));
}

std::string str(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

void structure_checks(VerificationReport& r, const ModelManifold& m, const LCKStructure& s,
                      std::span<const Point> pts) {
  const double tol = r.options.tol;
  const st::StructureCheck c = st::check_structure(s, pts);
  r.add("lck", c.lck, tol, Polarity::Below, "dOmega = theta ^ Omega");
  r.add("theta_closed", c.d_theta, tol, Polarity::Below, "d theta = 0");
  r.add("type_11", c.type_11, tol, Polarity::Below, "Omega(JX, JY) = Omega(X, Y)");
  r.add("positivity", c.min_positivity, 0.0, Polarity::Above, "Omega(X, JX) > 0");
  const st::LeeExtraction lee = st::extract_lee_form(s.omega(), pts);
  double recovered = lee.max_residual;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto stored = s.theta().values(pts[i]);
    for (std::size_t k = 0; k < stored.size(); ++k) recovered = std::max(recovered, std::abs(lee.theta[i][k] - stored[k]));
  }
  r.add("lee_extraction", recovered, tol, Polarity::Below, "theta recovered from dOmega = theta ^ Omega");
  r.add("lee_pair", st::lee_pair_residual(s, pts), tol, Polarity::Below, "i_B Omega = J theta, i_A Omega = -theta");
  if (!m.deck.empty()) {
    r.add("deck_invariance", mfd::invariance_residual(m, s.omega(), pts), tol, Polarity::Below,
          "gamma^* Omega = Omega");
    r.add("kahler_equivariance", mfd::equivariance_residual(m, calc::exp(-m.phi) * s.omega(), pts), tol,
          Polarity::Below, "gamma^* Omega_K = rho(gamma)^-1 Omega_K");
  }
}

void deck_and_flow_checks(VerificationReport& r, const ModelManifold& m, std::span<const Point> pts) {
  const double tol = r.options.tol;
  if (!m.deck.empty()) {
    r.add("deck_holomorphy", mfd::deck_holomorphy_residual(m, pts), tol, Polarity::Below, "D gamma J = J D gamma");
  }
  for (const auto& [name, flow] : m.flows) {
    r.add("flow[" + name + "].generator", mfd::flow_generator_residual(flow, 0.7, pts), tol, Polarity::Below,
          "d/dt Phi_t = X o Phi_t");
    if (flow.period() && flow.closure()) {
      r.add("flow[" + name + "].closure", mfd::flow_closure_residual(m, flow, pts), 1e-9, Polarity::Below,
            "Phi_T = id or a deck generator");
    }
  }
}

Eigen::MatrixXd random_invertible(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Eigen::MatrixXd R(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) R(i, j) = u(rng);
    if (std::abs(R.determinant()) > 0.1) return R;
  }
}

bool compact_torus(const ModelManifold& m) {
  if (m.torus.empty()) return false;
  for (const auto& name : m.torus) {
    if (!m.flow(name).period() || !m.flow(name).closure()) return false;
  }
  return true;
}

void torus_checks(VerificationReport& r, const ModelManifold& m, const LCKStructure* s, std::span<const Point> pts) {
  if (!compact_torus(m)) {
    r.diagnostics["torus"] = "no compact torus action registered";
    return;
  }
  const auto act = torus::TorusAction::of(m);
  const auto tp = pts.first(std::min<std::size_t>(kTorusPoints, pts.size()));
  r.add("torus.commutation", act.commutation_residual(tp), r.options.tol, Polarity::Below, "[xi_i, xi_j] = 0");
  r.add("torus.period", act.period_residual(tp), 1e-9, Polarity::Below, "Phi_T = id or a deck generator");
  const torus::ActionReport ar = torus::verdict(act, s, tp, kAveragingNodes);
  r.verdicts.push_back({torus::verdict_name(ar.verdict), ar.witnesses});
  r.diagnostics["intersection_dimension"] = ar.intersection_dim;
  for (const auto& g : ar.pairings) {
    r.diagnostics["pairings"][g.name] = {{"theta", g.pairing}, {"spread", g.spread}, {"vertical", g.vertical}};
  }
  // Verdicts do not depend on the choice of generators.
  std::mt19937_64 rng(r.options.seed);
  const auto rp = tp.first(std::min<std::size_t>(kRecombinationPoints, tp.size()));
  int changed = 0;
  for (int t = 0; t < kRecombinations; ++t) {
    const auto R = random_invertible(act.size(), rng);
    if (torus::verdict(act.recombined(R), s, rp, kRecombinationNodes).verdict != ar.verdict) ++changed;
  }
  r.add("torus.recombination", changed, 0.5, Polarity::Below, "verdict invariant under recombination of generators");
}

double lee_norm_defect(const LCKStructure& s, std::span<const Point> pts, const calc::ScalarField* expected) {
  double worst = 0.0;
  for (const auto& p : pts) {
    const auto b = s.lee().B.values(p);
    const double target = expected ? (*expected)(p) : 1.0;
    worst = std::max(worst, std::abs(s.metric()(p, b, b) - target));
  }
  return worst;
}

void vaisman_checks(VerificationReport& r, const LCKStructure& s, std::span<const Point> pts) {
  const double tol = r.options.tol;
  r.add("vaisman", st::vaisman_residual(s, pts), 1e-7, Polarity::Below, "nabla theta = 0");
  r.add("gauduchon", st::gauduchon_residual(s, pts), 1e-7, Polarity::Below, "d^* theta = 0");
  r.add("lee_norm", lee_norm_defect(s, pts, nullptr), 1e-9, Polarity::Below, "|B| = 1");
  r.add("potential", st::potential_residual(s, 1.0, pts), tol, Polarity::Below, "Omega = d_theta d^c_theta 1");
  const st::HermitianMetric& g = s.metric();
  r.add("B.holomorphic", st::holomorphy_residual(s.lee().B, pts), tol, Polarity::Below, "L_B J = 0");
  r.add("A.holomorphic", st::holomorphy_residual(s.lee().A, pts), tol, Polarity::Below, "L_A J = 0");
  r.add("B.killing", st::killing_residual(g, s.lee().B, pts), tol, Polarity::Below, "L_B g = 0");
  r.add("A.killing", st::killing_residual(g, s.lee().A, pts), tol, Polarity::Below, "L_A g = 0");
  const st::PotVReport pv = st::verify_potV(s, pts, tol);
  r.add("potV.shape", pv.shape, tol, Polarity::Below, "Omega = -dJtheta + theta ^ Jtheta");
  r.diagnostics["potV"] = pv.verdict;
}

void orbit_checks(VerificationReport& r, const std::string& prefix, const ModelManifold& cover,
                  const calc::DifferentialForm& omega, std::span<const Point> probes, int periods) {
  pot::OrbitOptions o;
  o.nodes = kOrbitNodes;
  o.periods = periods;
  const pot::OrbitResult res = pot::orbit_average_potential(cover, omega, cover.field("C"), probes, o);
  const pot::OrbitReport& q = res.report;
  r.add(prefix + ".equivariance", q.equivariance, 1e-7, Polarity::Below, "L_C omega = -omega");
  for (std::size_t i = 0; i < q.omega5.size(); ++i) {
    r.add(prefix + ".omega_t[" + str(o.probe_times[i]) + "]", q.omega5[i], 1e-6, Polarity::Below,
          "omega_t = cos t omega + sin t dJeta + dd^c g_t");
  }
  r.add(prefix + ".g_positive", q.min_g, 0.0, Polarity::Above, "g = (1/2 pi n) int_0^(2 pi n) g_t dt > 0");
  r.add(prefix + ".average_consistency", q.average_consistency, 1e-6, Polarity::Below,
        "(1/T) int_0^T g_t dt = (1/T) int_0^T (1 - cos s) f_s ds");
  r.add(prefix + ".deck_invariance", q.deck_invariance, 1e-6, Polarity::Below, "gamma^* Omega' = Omega'");
  r.add(prefix + ".loop_periods", q.loop_periods, 1e-6, Polarity::Below, "int_gamma theta' = int_gamma theta");
  r.add(prefix + ".lck", q.lck, 1e-6, Polarity::Below, "dOmega' = theta' ^ Omega'");
  r.add(prefix + ".potential", q.potential, 1e-6, Polarity::Below, "Omega' = g^-1 dd^c g");
  r.add(prefix + ".positivity", q.min_eigenvalue, 0.0, Polarity::Above, "Omega'(X, JX) > 0");
  double moved = 0.0;
  for (const auto& p : probes) moved = std::max(moved, std::abs(res.g(p) - res.f(p)));
  r.diagnostics[prefix] = {{"jc_flow", res.jc_flow}, {"periods", periods}, {"nodes", o.nodes},
                           {"probes", probes.size()}, {"min_f", q.min_f}, {"max_abs_g_minus_f", moved}};
}

void fixed_point_check(VerificationReport& r, const ModelManifold& m, std::span<const Point> probes) {
  pot::OrbitOptions o;
  o.nodes = kOrbitNodes;
  o.probe_times = {};
  const pot::OrbitResult res = pot::orbit_average_potential(m, m.kahler_lift(), m.field("C"), probes, o);
  double moved = 0.0;
  for (const auto& p : probes) moved = std::max(moved, std::abs(res.g(p) - res.f(p)));
  r.add("orbit.fixed_point", moved, 1e-9, Polarity::Below, "JC-invariant input: g = f");
}

void potential_diagnostics(VerificationReport& r, const pot::PotentialSolution& s) {
  r.diagnostics["potential"] = {{"f", s.f.label()},
                                {"a", s.a},
                                {"b", s.b},
                                {"K", s.K},
                                {"c", s.c},
                                {"min_g", s.min_g},
                                {"t_min", s.t_min},
                                {"nodes", s.nodes},
                                {"residuals",
                                 {{"periodicity", s.periodicity},
                                  {"first_order", s.first_order},
                                  {"second_order", s.second_order}}}};
}

void ode_checks(VerificationReport& r, const pot::PotentialSolution& s) {
  r.add("ode.periodicity", s.periodicity, 1e-9, Polarity::Below, "g(t + 2 pi) = g(t)");
  r.add("ode.first_order", s.first_order, r.options.tol, Polarity::Below, "g' = g(1 + f) - 1");
  r.add("ode.second_order", s.second_order, 1e-7, Polarity::Below,
        "g'' = 2(1 + f)g' + g f' - g(1 + f)^2 + (1 + f)");
  r.add("ode.min_g", s.min_g, 0.0, Polarity::Above, "g > 0");
  potential_diagnostics(r, s);
}

// The perturbed structure averaged over its Lee circle, as a cover with the
// same deck group and flows.
std::pair<ModelManifold, calc::DifferentialForm> lee_averaged(const pot::Leeolo& l) {
  const pot::AveragedStructure avg = pot::average_structure(l.manifold, {"B"}, kLeeCircleNodes);
  ModelManifold m = l.manifold;
  m.Omega = avg.Omega;
  m.theta = avg.theta;
  m.phi = avg.phi;
  return {m, avg.kahler};
}

void leeolo_suite(VerificationReport& r, const pot::Leeolo& l, const std::vector<Point>& pts) {
  const LCKStructure s = l.structure();
  structure_checks(r, l.manifold, s, pts);
  const pot::LeeoloReport q = pot::verify_leeolo(l, pts);
  const double tol = r.options.tol;
  r.add("leeolo.lck", q.lck, tol, Polarity::Below, "dOmega' = (1 + f) theta ^ Omega'");
  r.add("leeolo.lee_field", q.lee_field, 1e-9, Polarity::Below, "B' = B");
  r.add("leeolo.norm", q.norm, tol, Polarity::Below, "|B|^2_Omega' = 1 + f");
  r.add("leeolo.potential", q.potential, 1e-6, Polarity::Below, "Omega' = d_theta' d^c_theta' g");
  r.add("leeolo.f_colinear", q.f_colinear, tol, Polarity::Below, "df = f'(t) theta");
  ode_checks(r, l.potential);
  r.add("vaisman", st::vaisman_residual(s, pts), 0.01, Polarity::Above, "nabla theta' != 0");
  const st::PotVReport pv = st::verify_potV(s, pts, tol);
  r.add("potV.shape", pv.shape, 1e-3, Polarity::Above, "Omega' != -dJtheta' + theta' ^ Jtheta'");
  r.diagnostics["potV"] = pv.verdict;
  const auto [cover, kahler] = lee_averaged(l);
  orbit_checks(r, "orbit[1]", cover, kahler, head(pts, kOrbitProbes), 1);
}

void iota_xi_checks(VerificationReport& r, const ModelManifold& m, const LCKStructure& s, std::span<const Point> pts) {
  const double l0 = m.constant("lambda0");
  const auto imz = calc::DifferentialForm::function(m.dim(), calc::ScalarField::coordinate(3));
  const auto lhs = calc::interior_product(m.field("xi"), s.omega());
  const auto rhs = l0 * calc::twisted_d(imz, s.theta(), false);
  r.add("iota_xi", calc::sup_norm(lhs - rhs, pts), r.options.tol, Polarity::Below,
        "i_xi Omega = lambda0 d_theta Im z");
  const VectorField& xi = m.field("xi");
  double pairing = 0.0;
  for (const auto& p : pts) pairing = std::max(pairing, std::abs(s.theta().evaluate(p, {xi.values(p)})));
  r.add("horizontal", pairing, 1e-6, Polarity::Below, "theta(xi) = 0");
  r.add("vaisman", st::vaisman_residual(s, pts), 1e-3, Polarity::Above, "nabla theta != 0");
  if (compact_torus(m)) {
    const auto tp = pts.first(std::min<std::size_t>(kTorusPoints, pts.size()));
    r.add("isotropy", torus::isotropy_residual(torus::TorusAction::of(m), s, tp, kAveragingNodes), r.options.tol, Polarity::Below,
          "Omega(xi_i, xi_j) = 0");
  }
}

void nondiag_checks(VerificationReport& r, const ModelManifold& m, const LCKStructure& s, std::span<const Point> pts) {
  for (const std::string name : {"Z1", "Z2"}) {
    r.add(name + ".deck_invariance", mfd::deck_quotient_check(m, m.field(name), pts), 1e-10, Polarity::Below,
          "gamma_* " + name + " = " + name + " o gamma");
    r.add(name + ".holomorphic", st::holomorphy_residual(m.field(name), pts), 1e-10, Polarity::Below,
          "L_" + name + " J = 0");
  }
  // Complex time: the flows of W and JW commute.
  const mfd::FlowMap& W = m.flow("W");
  const mfd::FlowMap& iW = m.flow("iW");
  double worst = 0.0;
  for (const auto& p : pts) {
    const Point a = W(1.0, iW(0.2, p)), b = iW(0.2, W(1.0, p));
    for (int k = 0; k < p.dim(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  r.add("flow[W].complex_time", worst, r.options.tol, Polarity::Below, "Phi^W_s o Phi^JW_r = Phi^JW_r o Phi^W_s");
  r.add("potential", st::potential_residual(s, 1.0, pts), r.options.tol, Polarity::Below,
        "Omega = d_theta d^c_theta 1");
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
};

template <class Body>
VerificationReport guarded(const std::string& command, const std::string& fixture, const Options& opt, Body&& body) {
  VerificationReport r;
  r.command = command;
  r.fixture = fixture;
  r.options = opt;
  const Timer timer;
  try {
    body(r);
    r.finish();
  } catch (const mfd::UnknownFixture& e) {
    r.error = e.what();
    r.exit_code = kUnknown;
  } catch (const pot::InadmissibleF& e) {
    r.error = e.what();
    r.exit_code = kInadmissible;
  } catch (const NumericalError& e) {
    r.error = e.what();
    if (!e.where().empty()) {
      std::ostringstream at;
      at.precision(17);
      at << " at (";
      for (std::size_t i = 0; i < e.where().size(); ++i) at << (i ? ", " : "") << e.where()[i];
      at << ")";
      r.error += at.str();
    }
    r.exit_code = kNumerical;
  } catch (const std::invalid_argument& e) {
    r.error = e.what();
    r.exit_code = kUnknown;
  }
  r.runtime_ms = timer.ms();
  return r;
}

}  // namespace

VerificationReport run_verify(const std::string& fixture, const Options& opt) {
  return guarded("verify", fixture, opt, [&](VerificationReport& r) {
    const std::string name = mfd::FixtureId::parse(fixture).name;
    if (name == "leeolo") {
      const pot::Leeolo l = pot::leeolo_fixture(fixture);
      r.fixture = l.manifold.id;
      const auto pts = mfd::sample_points(l.manifold, opt.points, opt.seed);
      leeolo_suite(r, l, pts);
      deck_and_flow_checks(r, l.manifold, pts);
      const LCKStructure s = l.structure();
      torus_checks(r, l.manifold, &s, pts);
      return;
    }
    const ModelManifold m = mfd::gallery(fixture);
    r.fixture = m.id;
    const auto pts = mfd::sample_points(m, opt.points, opt.seed);
    std::optional<LCKStructure> s;
    if (m.Omega && m.theta) {
      s.emplace(LCKStructure::of(m));
      structure_checks(r, m, *s, pts);
    }
    deck_and_flow_checks(r, m, pts);
    if (name == "hopf_diag") {
      vaisman_checks(r, *s, pts);
      fixed_point_check(r, m, head(pts, kOrbitProbes));
    } else if (name == "hopf_perturbed") {
      orbit_checks(r, "orbit[1]", m, m.kahler_lift(), head(pts, kOrbitProbes), 1);
      orbit_checks(r, "orbit[2]", m, m.kahler_lift(), head(pts, kOrbitProbes), 2);
    } else if (name == "hopf_nondiag") {
      nondiag_checks(r, m, *s, pts);
    } else if (name == "inoue_splus" || name == "hxc_cover") {
      iota_xi_checks(r, m, *s, pts);
    }
    torus_checks(r, m, s ? &*s : nullptr, pts);
  });
}

VerificationReport run_potential_first_order(const std::string& f, const Options& opt) {
  return guarded("potential first-order", "first-order:" + f, opt, [&](VerificationReport& r) {
    const pot::PeriodicFunction fn = pot::PeriodicFunction::parse(f);
    const pot::PotentialSolution s = pot::solve_periodic_first_order(fn, 0.0, opt.nodes);
    ode_checks(r, s);
    if (f.rfind("const:", 0) == 0) {
      const double k = fn(0.0);
      double worst = 0.0;
      for (int i = 0; i < 256; ++i) worst = std::max(worst, std::abs(s.g(2.0 * M_PI * i / 256) - 1.0 / (1.0 + k)));
      r.add("ode.constant", worst, 1e-10, Polarity::Below, "f = k: g = 1 / (1 + k)");
      if (k == 0.0) r.add("ode.c", std::abs(s.c - 1.0), 1e-12, Polarity::Below, "f = 0: c = 1");
    }
  });
}

VerificationReport run_potential_orbit(const std::string& fixture, const Options& opt) {
  return guarded("potential orbit", fixture, opt, [&](VerificationReport& r) {
    const std::string name = mfd::FixtureId::parse(fixture).name;
    if (name == "leeolo") {
      const pot::Leeolo l = pot::leeolo_fixture(fixture);
      r.fixture = l.manifold.id;
      const auto probes = mfd::sample_points(l.manifold, kOrbitProbes, opt.seed);
      const auto [cover, kahler] = lee_averaged(l);
      orbit_checks(r, "orbit[1]", cover, kahler, probes, 1);
      return;
    }
    const ModelManifold m = mfd::gallery(fixture);
    r.fixture = m.id;
    if (!m.fields.count("C") && !m.flows.count("C")) {
      throw std::invalid_argument(m.id + " registers no field C with a closed-form flow of JC");
    }
    const auto probes = mfd::sample_points(m, kOrbitProbes, opt.seed);
    orbit_checks(r, "orbit[1]", m, m.kahler_lift(), probes, 1);
    orbit_checks(r, "orbit[2]", m, m.kahler_lift(), probes, 2);
  });
}

}  // namespace lck::cli

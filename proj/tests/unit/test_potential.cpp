#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lck/calculus/errors.hpp"
#include "lck/potential/potential.hpp"

using namespace lck::pot;
using lck::mfd::gallery;
using lck::st::LCKStructure;

namespace {

// Values computed ahead of time with 50-digit quadrature for f = 0.3 cos t, a = 0.
constexpr double kOracleK = 0.86512225584690425899;
constexpr double kOracleC = 0.86674084473768408957;
constexpr double kOracleTmin = 5.5373380135072778391;
constexpr double kOracleGmin = 0.81943438823952877499;
const std::vector<std::pair<double, double>> kOracleG = {
    {0.5, 0.94924881565735700322}, {1.0, 1.059127661591284963},   {2.0, 1.2403288255599991378},
    {M_PI, 1.1694502077330851477}, {4.0, 0.99327328213119188714}, {5.5, 0.8195504691539799686}};

// Independent check at 2^16 Simpson intervals: F(t) = t + eps sin t exactly,
// E(t) = int_0^t e^-F by cumulative Simpson on even nodes.
struct SimpsonOracle {
  static constexpr int N = 1 << 16;
  std::vector<double> E;  // at even nodes
  double K = 0.0, c = 0.0, h = 2.0 * M_PI / N;
  double eps;
  explicit SimpsonOracle(double e) : eps(e) {
    auto w = [&](int j) { return std::exp(-F(j * h)); };
    E.assign(N / 2 + 1, 0.0);
    for (int k = 1; k <= N / 2; ++k) E[k] = E[k - 1] + h / 3.0 * (w(2 * k - 2) + 4.0 * w(2 * k - 1) + w(2 * k));
    K = E[N / 2];
    const double b = 2.0 * M_PI;
    c = K * std::exp(b) / std::expm1(b);
  }
  double F(double t) const { return t + eps * std::sin(t); }
  double g_at_even(int k) const { return (c - E[k]) * std::exp(F(2 * k * h)); }
};

double rk4_duhamel(const std::function<double(double)>& f, double t, int steps) {
  // y = (g, g'), y' = (g', f - g)
  double g = 0.0, v = 0.0, s = 0.0;
  const double h = t / steps;
  auto acc = [&](double time, double gg) { return f(time) - gg; };
  for (int i = 0; i < steps; ++i) {
    const double k1g = v, k1v = acc(s, g);
    const double k2g = v + 0.5 * h * k1v, k2v = acc(s + 0.5 * h, g + 0.5 * h * k1g);
    const double k3g = v + 0.5 * h * k2v, k3v = acc(s + 0.5 * h, g + 0.5 * h * k2g);
    const double k4g = v + h * k3v, k4v = acc(s + h, g + h * k3g);
    g += h / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    s += h;
  }
  return g;
}

ModelManifold circle_hopf() {
  std::ostringstream beta;
  beta.precision(17);
  beta << std::exp(-M_PI);
  return gallery("hopf_diag:n=2,beta=" + beta.str());
}

PeriodicFunction random_trig(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  return PeriodicFunction::trigonometric(u(rng), {u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
}

}  // namespace

TEST_CASE("periodic functions") {
  const auto f = PeriodicFunction::trigonometric(0.1, {0.3, -0.2}, {0.05, 0.4});
  CHECK(f.periodicity_residual() < 1e-12);
  for (double t : {0.0, 0.7, 2.9, 5.1}) {
    const double h = 1e-4;
    CHECK(f.derivative(t) == doctest::Approx((f(t + h) - f(t - h)) / (2 * h)).epsilon(1e-7));
    CHECK(f.derivative(t, 2) == doctest::Approx((f(t + h) - 2 * f(t) + f(t - h)) / (h * h)).epsilon(1e-5));
  }
  // The closed-form primitive agrees with quadrature of the same function.
  const PeriodicFunction plain("plain", [f](double t, int order, std::span<double> out) { f.taylor(t, order, out); });
  const ScalarField t = ScalarField::coordinate(0);
  for (double x : {0.0, 1.3, 4.0, 9.5, -2.0}) {
    const lck::calc::Point p{x};
    CHECK(std::abs(f.primitive_of(t)(p) - plain.primitive_of(t)(p)) < 1e-12);
    CHECK(std::abs(f.primitive_of(t).partial(0)(p) - f(x)) < 1e-13);
  }
  CHECK(PeriodicFunction::parse("cos:0.3")(0.0) == doctest::Approx(0.3));
  CHECK(PeriodicFunction::parse("const:-0.5")(1.0) == doctest::Approx(-0.5));
  CHECK(PeriodicFunction::parse("cos:0.3").label() == "cos:0.29999999999999999");
  CHECK_THROWS_AS(PeriodicFunction::parse("sin:0.3"), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicFunction::parse("cos:abc"), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicFunction::parse("0.3"), std::invalid_argument);
}

TEST_CASE("periodic first-order solution, constant f") {
  const auto s0 = solve_periodic_first_order(PeriodicFunction::constant(0.0));
  CHECK(s0.b == doctest::Approx(2 * M_PI).epsilon(1e-14));
  CHECK(s0.K == doctest::Approx(1.0 - std::exp(-2 * M_PI)).epsilon(1e-13));
  CHECK(std::abs(s0.c - 1.0) < 1e-12);
  for (int i = 0; i < 64; ++i) CHECK(std::abs(s0.g(0.1 * i) - 1.0) < 1e-12);
  for (double k : {-0.5, 0.3, 2.0}) {
    CAPTURE(k);
    const auto s = solve_periodic_first_order(PeriodicFunction::constant(k));
    for (int i = 0; i < 64; ++i) CHECK(std::abs(s.g(0.1 * i) - 1.0 / (1.0 + k)) < 1e-10);
  }
  // The constant a rescales c and cancels in g.
  const auto sa = solve_periodic_first_order(PeriodicFunction::cosine(0.3), 0.7);
  const auto sb = solve_periodic_first_order(PeriodicFunction::cosine(0.3), 0.0);
  CHECK(sa.c == doctest::Approx(sb.c * std::exp(-0.7)).epsilon(1e-13));
  for (double t : {0.3, 2.0, 6.0}) CHECK(sa.g(t) == doctest::Approx(sb.g(t)).epsilon(1e-13));
}

TEST_CASE("periodic first-order solution, f = 0.3 cos t") {
  const auto s = solve_periodic_first_order(PeriodicFunction::cosine(0.3));
  CHECK(s.periodicity < 1e-9);
  CHECK(s.first_order < 1e-8);
  CHECK(s.second_order < 1e-7);
  CHECK(s.min_g > 0.0);
  CHECK(std::abs(s.K - kOracleK) < 1e-12);
  CHECK(std::abs(s.c - kOracleC) < 1e-12);
  CHECK(std::abs(s.min_g - kOracleGmin) < 1e-12);
  CHECK(std::abs(s.t_min - kOracleTmin) < 1e-6);
  for (const auto& [t, v] : kOracleG) CHECK(std::abs(s.g(t) - v) < 1e-12);

  const SimpsonOracle oracle(0.3);
  CHECK(std::abs(s.K - oracle.K) < 1e-7);
  CHECK(std::abs(s.c - oracle.c) < 1e-7);
  for (int k = 0; k <= SimpsonOracle::N / 2; k += 2048) {
    CHECK(std::abs(s.g(2 * k * oracle.h) - oracle.g_at_even(k)) < 1e-7);
  }
  // g(t + 2pi) = g(t) and Taylor derivatives agree with the ODE.
  for (double t : {0.2, 1.7, 4.4}) {
    CHECK(std::abs(s.g(t + 2 * M_PI) - s.g(t)) < 1e-12);
    const double opf = 1.0 + s.f(t);
    CHECK(std::abs(s.g.derivative(t) - (s.g(t) * opf - 1.0)) < 1e-12);
    const double g2 = s.g.derivative(t, 2), g1 = s.g.derivative(t);
    CHECK(std::abs(g2 - 2 * opf * g1 - s.g(t) * s.f.derivative(t) + s.g(t) * opf * opf - opf) < 1e-10);
  }
}

TEST_CASE("periodic first-order solution, random admissible f") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_trig(rng);
    CAPTURE(f.label());
    const auto s = solve_periodic_first_order(f);
    CHECK(s.periodicity < 1e-9);
    CHECK(s.first_order < 1e-8);
    CHECK(s.second_order < 1e-7);
    CHECK(s.min_g > 0.0);
  }
}

TEST_CASE("inadmissible f") {
  CHECK_THROWS_AS(solve_periodic_first_order(PeriodicFunction::constant(-1.0)), InadmissibleF);
  CHECK_THROWS_AS(solve_periodic_first_order(PeriodicFunction::cosine(1.2)), InadmissibleF);
  CHECK_THROWS_WITH(solve_periodic_first_order(PeriodicFunction::constant(-2.0)),
                    doctest::Contains("inadmissible f"));
  CHECK_THROWS_AS(solve_periodic_first_order(PeriodicFunction::cosine(0.3), 0.0, 100), std::invalid_argument);
}

TEST_CASE("Duhamel solution of g'' + g = f") {
  CHECK(duhamel_g([](double) { return 1.0; }, 0.0, 64) == 0.0);
  for (double t : {0.5, 1.0, 2.7, 6.0}) {
    CHECK(duhamel_g([](double) { return 0.8; }, t, 256) == doctest::Approx((1.0 - std::cos(t)) * 0.8).epsilon(1e-9));
    CHECK(std::abs(duhamel_g([](double s) { return std::cos(s); }, t, 256) - 0.5 * t * std::sin(t)) < 1e-8);
  }
  CHECK_THROWS_AS(duhamel_g([](double) { return 1.0; }, 1.0, 32), std::invalid_argument);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_trig(rng), q = random_trig(rng);
    auto fp = [&](double s) { return p(s); };
    auto fq = [&](double s) { return q(s); };
    auto mix = [&](double s) { return 2.0 * p(s) - 3.0 * q(s); };
    for (double t : {0.5, 1.0, 2.7}) {
      CHECK(std::abs(duhamel_g(mix, t, 256) - (2.0 * duhamel_g(fp, t, 256) - 3.0 * duhamel_g(fq, t, 256))) < 1e-13);
      CHECK(std::abs(duhamel_g(fp, t, 512) - rk4_duhamel(fp, t, 4000)) < 1e-7);
      CHECK(duhamel_residual(fp, t, 256) < 1e-6);
    }
  }
}

TEST_CASE("perturbed structure along the Lee circle") {
  const Leeolo flat = leeolo_fixture("leeolo:eps=0");
  const auto fp = lck::mfd::sample_points(flat.manifold, 30, 3);
  const ModelManifold& base_like = flat.manifold;
  for (const auto& p : fp) CHECK(std::abs(flat.g(p) - 1.0) < 1e-12);
  CHECK(lck::calc::sup_norm(*base_like.Omega - *circle_hopf().Omega, fp) < 1e-14);

  const Leeolo l = leeolo_fixture("leeolo:eps=0.3");
  const auto pts = lck::mfd::sample_points(l.manifold, 200, 42);
  const LeeoloReport r = verify_leeolo(l, pts);
  CHECK(r.lck < 1e-8);
  CHECK(r.lee_field < 1e-9);
  CHECK(r.norm < 1e-8);
  CHECK(r.potential < 1e-6);
  CHECK(r.f_colinear < 1e-8);
  CHECK(r.min_eigenvalue > 0.0);
  const LCKStructure s = l.structure();
  CHECK(lck::st::vaisman_residual(s, pts) > 0.01);
  const auto potv = lck::st::verify_potV(s, pts);
  CHECK_FALSE(potv.hypotheses_met);
  CHECK(potv.verdict == "hypotheses not met");
  CHECK(lck::mfd::invariance_residual(l.manifold, *l.manifold.Omega, pts) < 1e-8);
  CHECK(lck::mfd::equivariance_residual(l.manifold, l.manifold.kahler_lift(), pts) < 1e-8);
  for (int i = 0; i < 5; ++i) {
    CHECK(lck::mfd::deck_loop_integrals(l.manifold, *l.manifold.theta, pts[i], 96)[0] ==
          doctest::Approx(std::log(l.manifold.deck[0].rho)).epsilon(1e-9));
  }

  CHECK_THROWS_AS(leeolo_fixture("leeolo:eps=1.5"), InadmissibleF);
  CHECK_THROWS_WITH(build_leeolo(gallery("hopf_diag"), PeriodicFunction::cosine(0.3)),
                    doctest::Contains("not 2pi-periodic"));
  CHECK_THROWS_AS(build_leeolo(gallery("inoue_splus"), PeriodicFunction::cosine(0.3)), std::invalid_argument);
  CHECK_THROWS_AS(leeolo_fixture("leeolo:delta=1"), std::invalid_argument);
}

TEST_CASE("fixture registry") {
  const auto ids = fixture_ids();
  CHECK(std::find(ids.begin(), ids.end(), "leeolo") != ids.end());
  CHECK(std::is_sorted(ids.begin(), ids.end()));
  CHECK(fixture("leeolo:eps=0.2").id == "leeolo:eps=0.2");
  CHECK(fixture("hopf_diag").n == 2);
  CHECK_THROWS_AS(fixture("unknown_thing"), lck::mfd::UnknownFixture);
}

TEST_CASE("orbit-averaged potential") {
  const ModelManifold hopf = gallery("hopf_diag");
  const auto hp = lck::mfd::sample_points(hopf, 6, 8);
  const OrbitResult fixed = orbit_average_potential(hopf, hopf.kahler_lift(), hopf.field("C"), hp);
  for (const auto& p : hp) CHECK(std::abs(fixed.g(p) - fixed.f(p)) < 1e-9);
  CHECK(fixed.jc_flow == "A");

  const ModelManifold pert = gallery("hopf_perturbed");
  const auto pp = lck::mfd::sample_points(pert, 6, 8);
  for (int periods : {1, 2}) {
    CAPTURE(periods);
    OrbitOptions opt;
    opt.periods = periods;
    const OrbitResult o = orbit_average_potential(pert, pert.kahler_lift(), pert.field("C"), pp, opt);
    const OrbitReport& r = o.report;
    CHECK(r.equivariance < 1e-7);
    CHECK(r.theta_C < 1e-12);
    CHECK(r.min_f > 0.0);
    REQUIRE(r.omega5.size() == 3);
    CHECK(r.omega5_max() < 1e-6);
    CHECK(r.min_g > 0.0);
    CHECK(r.average_consistency < 1e-6);
    CHECK(r.deck_invariance < 1e-6);
    CHECK(r.loop_periods < 1e-6);
    CHECK(r.lck < 1e-8);
    CHECK(r.potential < 1e-6);
    CHECK(r.min_eigenvalue > 0.0);
    double moved = 0.0;
    for (const auto& p : pp) moved = std::max(moved, std::abs(o.g(p) - o.f(p)));
    CHECK(moved > 1e-3);
  }

  // Preconditions.
  CHECK_THROWS_WITH(orbit_average_potential(pert, pert.kahler_lift(), 2.0 * pert.field("C"), pp),
                    doctest::Contains("theta(C)"));
  const Leeolo l = leeolo_fixture("leeolo:eps=0.3");
  const auto lp = lck::mfd::sample_points(l.manifold, 6, 8);
  CHECK_THROWS_WITH(orbit_average_potential(l.manifold, l.manifold.kahler_lift(), l.manifold.field("C"), lp),
                    doctest::Contains("theta(C)"));
  OrbitOptions few;
  few.nodes = 64;
  CHECK_THROWS_AS(orbit_average_potential(hopf, hopf.kahler_lift(), hopf.field("C"), hp, few), std::invalid_argument);

  // Averaging the perturbed structure over its Lee circle first gives back the
  // Vaisman structure, whose potential is fixed.
  const AveragedStructure avg = average_structure(l.manifold, {"B"}, 8);
  CHECK(lck::calc::sup_norm(avg.Omega - *circle_hopf().Omega, lp) < 1e-12);
  for (const auto& p : lp) CHECK(std::abs(avg.phi(p) - circle_hopf().phi(p)) < 1e-12);
  ModelManifold lifted = l.manifold;
  lifted.Omega = avg.Omega;
  lifted.theta = avg.theta;
  lifted.phi = avg.phi;
  OrbitOptions two;
  two.probe_times = {1.0, 2.7};
  const auto lp3 = std::span<const lck::calc::Point>(lp).first(3);
  const OrbitResult lo = orbit_average_potential(lifted, avg.kahler, lifted.field("C"), lp3, two);
  for (const auto& p : lp3) CHECK(std::abs(lo.g(p) - lo.f(p)) < 1e-9);
  CHECK(lo.report.omega5_max() < 1e-6);
}

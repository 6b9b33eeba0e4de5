#include <cmath>

#include "doctest.h"
#include "lck/manifolds/manifold.hpp"

using namespace lck::mfd;
using lck::calc::cplx;

namespace {

double lck_defect(const ModelManifold& m, std::span<const Point> pts) {
  using namespace lck::calc;
  return sup_norm(exterior_d(*m.Omega) - wedge(*m.theta, *m.Omega), pts);
}

std::vector<double> rk4(const VectorField& X, std::span<const double> y0, double t, int steps) {
  std::vector<double> y(y0.begin(), y0.end());
  const double h = t / steps;
  auto f = [&](const std::vector<double>& p) { return X.values(Point(p)); };
  auto add = [](std::vector<double> a, const std::vector<double>& b, double s) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
    return a;
  };
  for (int k = 0; k < steps; ++k) {
    const auto k1 = f(y), k2 = f(add(y, k1, h / 2)), k3 = f(add(y, k2, h / 2)), k4 = f(add(y, k3, h));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return y;
}

double dist(const Point& a, const Point& b) {
  double d = 0;
  for (int i = 0; i < a.dim(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("fixture ids parse and unknown names are rejected") {
  const auto f = FixtureId::parse("hopf_nondiag:beta=0.4+0.1i,m=2");
  CHECK(f.name == "hopf_nondiag");
  CHECK(f.complex_number("beta", 0.0) == cplx(0.4, 0.1));
  CHECK(f.complex_number("x", cplx(1, -1)) == cplx(1, -1));
  CHECK(FixtureId::parse("a:z=-2.5e-1-3i").complex_number("z", 0.0) == cplx(-0.25, -3));
  CHECK(FixtureId::parse("a:z=i").complex_number("z", 0.0) == cplx(0, 1));
  CHECK_THROWS_AS(gallery("kodaira_thurston"), UnknownFixture);
  CHECK_THROWS_AS(gallery("hopf_diag:beta=1.5"), std::invalid_argument);
  CHECK_THROWS_AS(gallery("hopf_diag:beta=abc"), std::invalid_argument);
  CHECK_THROWS_AS(gallery("inoue_splus:r=0"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(gallery("inoue_splus:t_im=0.5"), doctest::Contains("real t"), std::invalid_argument);
}

TEST_CASE("every gallery fixture has holomorphic deck maps and a consistent structure") {
  for (const auto& id : gallery_ids()) {
    CAPTURE(id);
    const ModelManifold m = gallery(id);
    const auto pts = sample_points(m, 12, 7);
    for (const auto& p : pts) CHECK(m.contains(p));
    CHECK(deck_holomorphy_residual(m, pts) < 1e-12);
    if (m.Omega) {
      CHECK(lck_defect(m, pts) < 1e-8);
      CHECK(invariance_residual(m, *m.Omega, pts) < 1e-8);
      CHECK(invariance_residual(m, *m.theta, pts) < 1e-8);
      CHECK(equivariance_residual(m, m.kahler_lift(), pts) < 1e-8);
      const double dphi = lck::calc::sup_norm(lck::calc::exterior_d(lck::calc::DifferentialForm::function(
                                                  m.dim(), m.phi)) - *m.theta, pts);
      CHECK(dphi < 1e-10);
      for (const auto& p : pts) {
        const auto loops = deck_loop_integrals(m, *m.theta, p);
        for (std::size_t g = 0; g < m.deck.size(); ++g) CHECK(loops[g] == doctest::Approx(std::log(m.deck[g].rho)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("samplers are deterministic in the seed") {
  for (const auto& id : gallery_ids()) {
    const ModelManifold m = gallery(id);
    const auto a = sample_points(m, 5, 42), b = sample_points(m, 5, 42), c = sample_points(m, 5, 43);
    for (int i = 0; i < 5; ++i) CHECK(a[i] == b[i]);
    CHECK_FALSE(a[0] == c[0]);
  }
}

TEST_CASE("registered flows are flows of their generators and close up on the deck group") {
  for (const auto& id : gallery_ids()) {
    const ModelManifold m = gallery(id);
    const auto pts = sample_points(m, 6, 3);
    for (const auto& [name, f] : m.flows) {
      CAPTURE(id);
      CAPTURE(name);
      CHECK(flow_group_residual(f, 0.37, -0.81, pts) < 1e-10);
      CHECK(flow_generator_residual(f, 0.0, pts) < 1e-10);
      CHECK(flow_generator_residual(f, 0.6, pts) < 1e-10);
      if (f.period() && f.closure()) CHECK(flow_closure_residual(m, f, pts) < 1e-9);
      CHECK(deck_quotient_check(m, f.generator(), pts) < 1e-9);
    }
  }
  CHECK_THROWS_AS(gallery("hopf_diag").flow("nope"), std::invalid_argument);
}

TEST_CASE("hopf_diag: closed-form values") {
  const ModelManifold m = gallery("hopf_diag:n=2,beta=0.5");
  const Point p{0.3, -0.2, 0.5, 0.1};
  const auto Om = *m.Omega;
  const double r2 = 0.09 + 0.04 + 0.25 + 0.01;
  CHECK(Om.at({0, 1})(p) == doctest::Approx(4.0 / r2));
  CHECK(Om.at({2, 3})(p) == doctest::Approx(4.0 / r2));
  CHECK(Om.at({0, 2})(p) == doctest::Approx(0.0));
  CHECK(m.deck[0].rho == doctest::Approx(4.0));
  const auto pts = sample_points(m, 10, 1);
  CHECK(deck_quotient_check(m, VectorField::coordinate(4, 2), pts) == doctest::Approx(0.5).epsilon(1e-12));
  for (const auto& q : pts) {
    const double r = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    CHECK(r <= 1.0);
    CHECK(r >= 0.5);
  }
}

TEST_CASE("hopf_nondiag: holomorphic frame and complex-time flow") {
  const ModelManifold m = gallery("hopf_nondiag");
  const auto pts = sample_points(m, 8, 11);
  using lck::calc::bracket;
  const VectorField Z1 = m.field("Z1"), Z2 = m.field("Z2"), iZ1 = m.field("iZ1"), iZ2 = m.field("iZ2");
  CHECK(lck::calc::sup_norm(lck::calc::DifferentialForm(4, 0, {bracket(Z1, Z2)[0]}), pts) < 1e-12);
  for (const auto& p : pts) {
    const auto jz = lck::calc::apply_J(Z1.values(p));
    const auto iz = iZ1.values(p);
    for (int k = 0; k < 4; ++k) CHECK(jz[k] == doctest::Approx(iz[k]));
    const auto jz2 = lck::calc::apply_J(Z2.values(p));
    const auto iz2 = iZ2.values(p);
    for (int k = 0; k < 4; ++k) CHECK(jz2[k] == doctest::Approx(iz2[k]));
    for (const auto& [X, Y] : {std::pair{Z1, Z2}, {Z1, iZ2}, {iZ1, Z2}, {m.field("xi1"), m.field("xi2")}}) {
      const auto b = bracket(X, Y).values(p);
      for (double c : b) CHECK(std::abs(c) < 1e-10);
    }
  }
  // Complex time u = s + i r: Phi^W_s o Phi^{iW}_r, checked against RK4 and the closed form.
  const FlowMap& W = m.flow("W");
  const FlowMap& iW = m.flow("iW");
  for (const auto& p : pts) {
    const Point exact = W(0.3, p);
    const auto num = rk4(W.generator(), p.coords(), 0.3, 200);
    CHECK(dist(exact, Point(num)) < 1e-9);
    const Point both = W(1.0, iW(0.2, p));
    const Point swapped = iW(0.2, W(1.0, p));
    CHECK(dist(both, swapped) < 1e-10);
    const auto step = rk4(iW.generator(), rk4(W.generator(), p.coords(), 1.0, 400), 0.2, 200);
    CHECK(dist(both, Point(step)) < 1e-8);
  }
  // tau shifts by s along xi2 and psi has the expected automorphy.
  const auto tau = m.scalars.at("tau");
  for (const auto& p : pts) CHECK(tau(m.flow("xi2")(0.7, p)) == doctest::Approx(tau(p) + 0.7).epsilon(1e-10));
  CHECK(m.constant("rho") == doctest::Approx(std::exp(-4.0 * std::log(std::abs(cplx(0.4, 0.1))))));
}

TEST_CASE("inoue_splus: group relations and flat directions") {
  for (const std::string id : {"inoue_splus", "inoue_splus:p=1,q=-2,r=3,t=0.4"}) {
    CAPTURE(id);
    const ModelManifold m = gallery(id);
    const auto pts = sample_points(m, 6, 5);
    const double l0 = m.constant("lambda0");
    const double alpha = m.constant("alpha");
    CHECK(alpha == doctest::Approx((3 + std::sqrt(5.0)) / 2));
    const int N[2][2] = {{2, 1}, {1, 1}};
    auto g = [&](int k) { return m.deck[k].map; };
    for (int i = 0; i < 2; ++i) {
      for (const auto& p : pts) {
        // g0 g_i g0^{-1} agrees with g1^{n_i1} g2^{n_i2} up to an integer power of g3.
        const Point q{p[0] / alpha, p[1] / alpha, p[2] - m.constant("t"), p[3]};
        const Point lhs = g(0)(g(i + 1)(q));
        Point rhs = p;
        for (int k = 0; k < N[i][1]; ++k) rhs = g(2)(rhs);
        for (int k = 0; k < N[i][0]; ++k) rhs = g(1)(rhs);
        CHECK(lhs[0] == doctest::Approx(rhs[0]));
        CHECK(lhs[1] == doctest::Approx(rhs[1]));
        CHECK(lhs[3] == doctest::Approx(rhs[3]));
        const double k = (lhs[2] - rhs[2]) / l0;
        CHECK(std::abs(k - std::round(k)) < 1e-9);
      }
    }
    // g1 and g2 commute up to g3.
    for (const auto& p : pts) {
      const Point a = g(1)(g(2)(p)), b = g(2)(g(1)(p));
      const double k = (a[2] - b[2]) / l0;
      CHECK(std::abs(k - std::round(k)) < 1e-9);
    }
    CHECK(invariance_residual(m, m.kahler_lift(), pts) > 0.1);
  }
  const ModelManifold cover = gallery("hxc_cover");
  CHECK(cover.deck.empty());
  CHECK_FALSE(cover.flow("xi").closure());
}

TEST_CASE("product fixtures embed both factors") {
  const ModelManifold m = gallery("product");
  CHECK(m.n == 4);
  CHECK(m.deck.size() == 2);
  CHECK(m.flows.count("a.A") == 1);
  CHECK(m.flows.count("b.B") == 1);
  CHECK(m.torus.size() == 4);
  CHECK(*m.flow("b.B").closure() == 1);
  const ModelManifold mixed = gallery("product:a=hopf_diag,b=inoue_splus");
  CHECK(mixed.deck.size() == 5);
  CHECK_THROWS_AS(gallery("product:a=product"), std::invalid_argument);
}

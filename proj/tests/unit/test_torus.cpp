#include <cmath>
#include <random>

#include "../support/random_forms.hpp"
#include "doctest.h"
#include "lck/calculus/errors.hpp"
#include "lck/torus/torus.hpp"

using namespace lck::torus;
using lck::calc::ScalarField;
using lck::mfd::gallery;
using lck::st::LCKStructure;
using lck::testing::FormFactory;

namespace {

Eigen::MatrixXd random_invertible(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (;;) {
    Eigen::MatrixXd R(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) R(i, j) = u(rng);
    }
    if (std::abs(R.determinant()) > 0.2) return R;
  }
}

}  // namespace

TEST_CASE("registered tori are commuting periodic actions") {
  for (const std::string id : {"hopf_diag", "hopf_nondiag", "inoue_splus", "product", "hopf_perturbed"}) {
    CAPTURE(id);
    const ModelManifold m = gallery(id);
    const TorusAction act = TorusAction::of(m);
    const auto pts = lck::mfd::sample_points(m, 10, 4);
    CHECK(act.commutation_residual(pts) < 1e-8);
    CHECK(act.period_residual(pts) < 1e-9);
  }
  const ModelManifold nd = gallery("hopf_nondiag");
  CHECK_THROWS_AS(TorusAction::of(nd, {"W"}), std::invalid_argument);
}

TEST_CASE("intersection dimension of t and Jt") {
  const ModelManifold hopf = gallery("hopf_diag"), nd = gallery("hopf_nondiag"), prod = gallery("product");
  CHECK(intersection_dimension(TorusAction::of(hopf), lck::mfd::sample_points(hopf, 50, 1)) == 2);
  CHECK(intersection_dimension(TorusAction::of(nd), lck::mfd::sample_points(nd, 50, 1)) == 0);
  CHECK(intersection_dimension(TorusAction::of(prod), lck::mfd::sample_points(prod, 50, 1)) == 4);
  CHECK(intersection_dimension(TorusAction::of(hopf, {"rot1", "rot2"}), lck::mfd::sample_points(hopf, 50, 1)) == 0);
}

TEST_CASE("averaging over the action") {
  const ModelManifold hopf = gallery("hopf_diag");
  const TorusAction act = TorusAction::of(hopf);
  const auto pts = lck::mfd::sample_points(hopf, 8, 2);
  CHECK(lck::calc::sup_norm(average_over_action(*hopf.theta, act, 16) - *hopf.theta, pts) < 1e-10);
  CHECK(lck::calc::sup_norm(average_over_action(*hopf.Omega, act, 16) - *hopf.Omega, pts) < 1e-10);

  FormFactory ff(21);
  const auto x = lck::calc::coordinates(4);
  const ScalarField r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
  // Deck-invariant (homogeneous of degree 0) but not rotation-invariant.
  const auto a = lck::calc::DifferentialForm::basis(4, {0, 2}) * (x[0] * x[3] / (r2 * r2)) +
                 lck::calc::DifferentialForm::basis(4, {1, 3}) * (x[1] * x[2] / (r2 * r2));
  const auto avg = average_over_action(a, act, 16);
  for (int i = 0; i < act.size(); ++i) {
    CHECK(lck::calc::sup_norm(lck::calc::lie_derivative(act.generator(i), avg), pts) < 1e-7);
  }
  CHECK(lck::calc::sup_norm(average_over_action(avg, act, 8) - avg, pts) < 1e-10);
  const auto lin = average_over_action(2.0 * a - *hopf.Omega, act, 16) - (2.0 * avg - *hopf.Omega);
  CHECK(lck::calc::sup_norm(lin, pts) < 1e-10);
  CHECK_THROWS_AS(average_over_action(a, act, 4), std::invalid_argument);

  // Positivity and closedness survive averaging; so does the period of theta.
  const ModelManifold pert = gallery("hopf_perturbed");
  const TorusAction pact = TorusAction::of(pert, {"JC"});
  const auto ppts = lck::mfd::sample_points(pert, 8, 3);
  const auto om = average_over_action(*pert.Omega, pact, 16);
  const LCKStructure averaged(om, average_over_action(*pert.theta, pact, 16));
  for (const auto& p : ppts) CHECK(averaged.metric().min_eigenvalue(p) > 0.0);
  CHECK(lck::calc::sup_norm(lck::calc::exterior_d(averaged.theta()), ppts) < 1e-10);
  for (const auto& p : ppts) {
    CHECK(lck::mfd::deck_loop_integrals(pert, averaged.theta(), p)[0] ==
          doctest::Approx(std::log(pert.deck[0].rho)).epsilon(1e-9));
  }
}

TEST_CASE("vertical and horizontal generators") {
  const ModelManifold hopf = gallery("hopf_diag");
  const TorusAction act = TorusAction::of(hopf);
  const auto pts = lck::mfd::sample_points(hopf, 10, 5);
  auto labels = classify_vertical(act, *hopf.theta, pts, 16);
  REQUIRE(labels.size() == 2);
  CHECK(labels[0].name == "A");
  CHECK_FALSE(labels[0].vertical);
  CHECK(labels[1].vertical);
  CHECK(labels[1].pairing == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& l : classify_vertical(act, lck::calc::DifferentialForm(4, 1), pts, 16)) CHECK_FALSE(l.vertical);

  // Labels depend only on the class: positive rescaling and adding df for invariant f.
  const auto x = lck::calc::coordinates(4);
  const ScalarField f = (x[0] * x[0] + x[1] * x[1]) / (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
  const auto shifted = 3.0 * *hopf.theta + lck::calc::exterior_d(lck::calc::DifferentialForm::function(4, f));
  labels = classify_vertical(act, shifted, pts, 16);
  CHECK_FALSE(labels[0].vertical);
  CHECK(labels[1].vertical);

  const ModelManifold inoue = gallery("inoue_splus");
  const auto ipts = lck::mfd::sample_points(inoue, 10, 5);
  const auto il = classify_vertical(TorusAction::of(inoue), *inoue.theta, ipts, 8);
  CHECK_FALSE(il[0].vertical);
  CHECK(std::abs(il[0].pairing) < 1e-6);
  CHECK(isotropy_residual(TorusAction::of(inoue), LCKStructure::of(inoue), ipts, 8) < 1e-12);
  CHECK_THROWS_WITH(isotropy_residual(act, LCKStructure::of(hopf), pts, 16), "isotropy applies to horizontal actions");
}

TEST_CASE("verdict table") {
  const ModelManifold hopf = gallery("hopf_diag"), nd = gallery("hopf_nondiag"), prod = gallery("product"),
                      inoue = gallery("inoue_splus");
  const auto hp = lck::mfd::sample_points(hopf, 50, 42);
  const auto np = lck::mfd::sample_points(nd, 50, 42);
  const auto pp = lck::mfd::sample_points(prod, 50, 42);
  const auto ip = lck::mfd::sample_points(inoue, 50, 42);
  const LCKStructure hs = LCKStructure::of(hopf), ns = LCKStructure::of(nd), is = LCKStructure::of(inoue);
  CHECK(verdict(TorusAction::of(hopf), &hs, hp).verdict == Verdict::VaismanExists);
  const ActionReport nr = verdict(TorusAction::of(nd), &ns, np);
  CHECK(nr.verdict == Verdict::PositivePotentialExists);
  CHECK(nr.intersection_dim == 0);
  CHECK_FALSE(nr.witnesses.empty());
  CHECK(verdict(TorusAction::of(nd), nullptr, np).verdict == Verdict::PurelyReal);
  CHECK(verdict(TorusAction::of(prod), nullptr, pp).verdict == Verdict::NoLCKPossible);
  CHECK(verdict(TorusAction::of(inoue), &is, ip).verdict == Verdict::PurelyReal);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto R2 = random_invertible(2, rng);
    const auto R4 = random_invertible(4, rng);
    CHECK(verdict(TorusAction::of(hopf).recombined(R2), &hs, hp).verdict == Verdict::VaismanExists);
    CHECK(verdict(TorusAction::of(nd).recombined(R2), &ns, np).verdict == Verdict::PositivePotentialExists);
    CHECK(verdict(TorusAction::of(prod).recombined(R4), nullptr, pp).verdict == Verdict::NoLCKPossible);
  }
}

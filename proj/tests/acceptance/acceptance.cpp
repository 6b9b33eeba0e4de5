// Acceptance run: one PASS/FAIL line per criterion. The report-based criteria
// read the JSON written by the command-line tool; the rest call the libraries.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../support/random_forms.hpp"
#include "json.hpp"
#include "lck/cli/report.hpp"
#include "lck/potential/potential.hpp"

#include <unistd.h>

using json = nlohmann::ordered_json;
using namespace lck;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const json* fixture_report(const json& report, const std::string& prefix) {
  for (const auto& r : report.at("reports")) {
    if (r.at("fixture").get<std::string>().rfind(prefix, 0) == 0) return &r;
  }
  return nullptr;
}

double residual(const json& r, const std::string& name) {
  for (const auto& c : r.at("checks")) {
    if (c.at("name") == name) return c.at("residual").is_null() ? NAN : c.at("residual").get<double>();
  }
  return NAN;
}

// residual < bound (or > bound for expected-large checks), and the check exists.
void below(Outcome& o, const json* r, const std::string& name, double bound) {
  if (!r) return o.require(false, "missing report for " + name);
  const double v = residual(*r, name);
  o.require(v < bound, r->at("fixture").get<std::string>() + " " + name + " = " + sci(v) + " (need < " + sci(bound) + ")");
}

void above(Outcome& o, const json* r, const std::string& name, double bound) {
  if (!r) return o.require(false, "missing report for " + name);
  const double v = residual(*r, name);
  o.require(v > bound, r->at("fixture").get<std::string>() + " " + name + " = " + sci(v) + " (need > " + sci(bound) + ")");
}

std::string verdict_of(const json* r) {
  if (!r || r->at("verdicts").empty()) return "none";
  return r->at("verdicts")[0].at("kind").get<std::string>();
}

// Identities of the form calculus on random forms.
constexpr int kDim = 4;

struct LinearFlow {
  double a1 = 0.3, b1 = -0.7, a2 = -0.2, b2 = 0.4;
  calc::VectorField field() const {
    auto x = calc::coordinates(kDim);
    return calc::VectorField({a1 * x[0] - b1 * x[1], b1 * x[0] + a1 * x[1], a2 * x[2] - b2 * x[3],
                              b2 * x[2] + a2 * x[3]});
  }
  calc::ChartMap at(double t) const {
    auto x = calc::coordinates(kDim);
    const double r1 = std::exp(a1 * t), r2 = std::exp(a2 * t);
    const double c1 = std::cos(b1 * t), s1 = std::sin(b1 * t);
    const double c2 = std::cos(b2 * t), s2 = std::sin(b2 * t);
    return calc::ChartMap(kDim, {r1 * (c1 * x[0] - s1 * x[1]), r1 * (s1 * x[0] + c1 * x[1]),
                                 r2 * (c2 * x[2] - s2 * x[3]), r2 * (s2 * x[2] + c2 * x[3])});
  }
};

Outcome calculus_laws() {
  using calc::sup_norm;
  Outcome o;
  testing::FormFactory ff(2024);
  const auto pts = ff.points(kDim, 4);
  double dd = 0, tt = 0, jd = 0, ip = 0, worst_order = INFINITY;
  const auto theta = calc::exterior_d(calc::DifferentialForm::function(kDim, ff.field(kDim)));
  for (int k = 0; k < 20; ++k) {
    const auto a = ff.form(kDim, ff.degree(2));
    dd = std::max(dd, sup_norm(calc::exterior_d(calc::exterior_d(a)), pts));
    tt = std::max(tt, sup_norm(calc::twisted_d(calc::twisted_d(a, theta, false), theta, false), pts));
    const auto comm = calc::apply_J(calc::exterior_d(a)) - calc::exterior_d(calc::apply_J(a));
    jd = std::max(jd, sup_norm(comm - calc::dc(a), pts));
    const auto X = ff.vector_field(kDim);
    const auto b = ff.form(kDim, 1 + ff.degree(1)), c = ff.form(kDim, 1 + ff.degree(1));
    const double sign = b.degree() % 2 == 0 ? 1.0 : -1.0;
    const auto lhs = calc::interior_product(X, calc::wedge(b, c));
    const auto rhs = calc::wedge(calc::interior_product(X, b), c) + sign * calc::wedge(b, calc::interior_product(X, c));
    ip = std::max(ip, sup_norm(lhs - rhs, pts));
  }
  // Cartan formula against central differences of the flow pullback.
  const LinearFlow flow;
  const auto X = flow.field();
  for (int k = 0; k < 20; ++k) {
    const auto a = ff.form(kDim, ff.degree(2));
    const auto lie = calc::lie_derivative(X, a);
    double err[2];
    const double hs[2] = {1e-3, 1e-4};
    for (int i = 0; i < 2; ++i) {
      const auto fd = (1.0 / (2 * hs[i])) * (calc::pullback(flow.at(hs[i]), a) - calc::pullback(flow.at(-hs[i]), a));
      err[i] = sup_norm(lie - fd, pts);
    }
    if (err[0] > 1e-13) worst_order = std::min(worst_order, std::log10(err[0] / err[1]));
  }
  o.require(dd < 1e-10, "d^2 = " + sci(dd));
  o.require(tt < 1e-10, "d_theta^2 = " + sci(tt));
  o.require(jd < 1e-10, "[J,d] - d^c = " + sci(jd));
  o.require(ip < 1e-10, "antiderivation = " + sci(ip));
  o.require(worst_order >= 1.9, "observed flow order " + sci(worst_order));
  o.notes.push_back("max residual " + sci(std::max({dd, tt, jd, ip})) + ", flow order " + sci(worst_order));
  return o;
}

// Periodic first-order solver against constants and a Simpson oracle.
Outcome ode_construction() {
  Outcome o;
  const auto zero = pot::solve_periodic_first_order(pot::PeriodicFunction::constant(0.0));
  double worst = 0.0;
  for (int i = 0; i < 256; ++i) worst = std::max(worst, std::abs(zero.g(2 * M_PI * i / 256) - 1.0));
  o.require(worst < 1e-12 && std::abs(zero.c - 1.0) < 1e-12, "f = 0: |g - 1| = " + sci(worst));
  for (double k : {-0.5, 0.3, 2.0}) {
    const auto s = pot::solve_periodic_first_order(pot::PeriodicFunction::constant(k));
    double w = 0.0;
    for (int i = 0; i < 256; ++i) w = std::max(w, std::abs(s.g(2 * M_PI * i / 256) - 1.0 / (1.0 + k)));
    o.require(w < 1e-10, "f = " + sci(k) + ": |g - 1/(1+k)| = " + sci(w));
  }
  const auto s = pot::solve_periodic_first_order(pot::PeriodicFunction::cosine(0.3));
  o.require(s.periodicity < 1e-9, "periodicity " + sci(s.periodicity));
  o.require(s.first_order < 1e-8, "first order " + sci(s.first_order));
  o.require(s.second_order < 1e-7, "second order " + sci(s.second_order));
  o.require(s.min_g > 0.0, "min g " + sci(s.min_g));
  // 2^16-interval Simpson oracle with F(t) = t + 0.3 sin t in closed form.
  const int N = 1 << 16;
  const double h = 2 * M_PI / N;
  auto F = [](double t) { return t + 0.3 * std::sin(t); };
  std::vector<double> E(N / 2 + 1, 0.0);
  for (int k = 1; k <= N / 2; ++k) {
    E[k] = E[k - 1] + h / 3 * (std::exp(-F((2 * k - 2) * h)) + 4 * std::exp(-F((2 * k - 1) * h)) + std::exp(-F(2 * k * h)));
  }
  const double b = 2 * M_PI, c = E[N / 2] * std::exp(b) / std::expm1(b);
  double oracle = std::abs(c - s.c);
  for (int k = 0; k <= N / 2; k += 512) oracle = std::max(oracle, std::abs((c - E[k]) * std::exp(F(2 * k * h)) - s.g(2 * k * h)));
  o.require(oracle < 1e-7, "oracle distance " + sci(oracle));
  o.notes.push_back("oracle distance " + sci(oracle) + ", min g " + sci(s.min_g));
  return o;
}

bool run(const std::string& cmd) { return std::system(cmd.c_str()) == 0; }

json load(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path to lck>\n");
    return 2;
  }
  const std::string tool = argv[1];
  const auto dir = std::filesystem::temp_directory_path() / ("lck_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string first = (dir / "first.json").string(), second = (dir / "second.json").string();
  const std::string quiet = " > " + (dir / "log.txt").string() + " 2>&1";
  run(tool + " report --all --seed 42 --json " + first + quiet);
  run(tool + " report --all --seed 42 --json " + second + quiet);
  json report;
  json again;
  try {
    report = load(first);
    again = load(second);
  } catch (const std::exception& e) {
    std::printf("FAIL  report --all did not produce JSON: %s\n", e.what());
    return 1;
  }

  const json* hopf = fixture_report(report, "hopf_diag");
  const json* nondiag = fixture_report(report, "hopf_nondiag");
  const json* inoue = fixture_report(report, "inoue_splus");
  const json* leeolo = fixture_report(report, "leeolo");
  const json* perturbed = fixture_report(report, "hopf_perturbed");
  const json* product = fixture_report(report, "product");

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  criteria.emplace_back("1 calculus laws", calculus_laws);
  criteria.emplace_back("2 gallery LCK identities", [&] {
    Outcome o;
    for (const json* r : {hopf, inoue, leeolo}) {
      below(o, r, "lck", 1e-8);
      below(o, r, "lee_extraction", 1e-8);
      if (r) o.require(r->at("points").get<int>() == 200, "points != 200");
    }
    return o;
  });
  criteria.emplace_back("3 Vaisman suite on hopf_diag", [&] {
    Outcome o;
    below(o, hopf, "vaisman", 1e-7);
    below(o, hopf, "gauduchon", 1e-7);
    below(o, hopf, "lee_norm", 1e-9);
    below(o, hopf, "potential", 1e-8);
    for (const std::string f : {"B", "A"}) {
      below(o, hopf, f + ".holomorphic", 1e-8);
      below(o, hopf, f + ".killing", 1e-8);
    }
    return o;
  });
  criteria.emplace_back("4 Inoue S+ suite", [&] {
    Outcome o;
    below(o, inoue, "deck_invariance", 1e-8);
    below(o, inoue, "iota_xi", 1e-8);
    below(o, inoue, "horizontal", 1e-6);
    above(o, inoue, "vaisman", 1e-3);
    return o;
  });
  criteria.emplace_back("5 non-diagonal Hopf suite", [&] {
    Outcome o;
    for (const std::string z : {"Z1", "Z2"}) {
      below(o, nondiag, z + ".deck_invariance", 1e-10);
      below(o, nondiag, z + ".holomorphic", 1e-10);
    }
    for (const std::string f : {"xi1", "xi2", "W", "iW"}) below(o, nondiag, "flow[" + f + "].generator", 1e-8);
    below(o, nondiag, "flow[W].complex_time", 1e-8);
    below(o, nondiag, "flow[xi1].closure", 1e-9);
    below(o, nondiag, "flow[xi2].closure", 1e-9);
    o.require(nondiag && nondiag->at("diagnostics").value("intersection_dimension", -1) == 0,
              "intersection dimension is not 0");
    return o;
  });
  criteria.emplace_back("6 periodic ODE construction", ode_construction);
  criteria.emplace_back("7 perturbed structure end to end", [&] {
    Outcome o;
    below(o, leeolo, "leeolo.lck", 1e-8);
    below(o, leeolo, "leeolo.lee_field", 1e-9);
    below(o, leeolo, "leeolo.norm", 1e-8);
    below(o, leeolo, "leeolo.potential", 1e-6);
    above(o, leeolo, "vaisman", 0.01);
    return o;
  });
  criteria.emplace_back("8 orbit averaging", [&] {
    Outcome o;
    for (const std::string t : {"0.5", "1", "2.7"}) below(o, leeolo, "orbit[1].omega_t[" + t + "]", 1e-6);
    above(o, leeolo, "orbit[1].g_positive", 0.0);
    below(o, leeolo, "orbit[1].deck_invariance", 1e-6);
    below(o, leeolo, "orbit[1].lck", 1e-6);
    below(o, leeolo, "orbit[1].potential", 1e-6);
    below(o, hopf, "orbit.fixed_point", 1e-9);
    for (const std::string n : {"orbit[1]", "orbit[2]"}) {
      for (const std::string t : {"0.5", "1", "2.7"}) below(o, perturbed, n + ".omega_t[" + t + "]", 1e-6);
      above(o, perturbed, n + ".g_positive", 0.0);
      below(o, perturbed, n + ".deck_invariance", 1e-6);
      below(o, perturbed, n + ".lck", 1e-6);
      below(o, perturbed, n + ".potential", 1e-6);
    }
    return o;
  });
  criteria.emplace_back("9 verdict table", [&] {
    Outcome o;
    o.require(verdict_of(hopf) == "VaismanExists", "hopf_diag: " + verdict_of(hopf));
    o.require(verdict_of(nondiag) == "PositivePotentialExists", "hopf_nondiag: " + verdict_of(nondiag));
    o.require(verdict_of(product) == "NoLCKPossible", "product: " + verdict_of(product));
    o.require(product && product->at("diagnostics").value("intersection_dimension", -1) == 4,
              "product intersection dimension is not 4");
    for (const json* r : {hopf, nondiag, product}) below(o, r, "torus.recombination", 0.5);
    return o;
  });
  criteria.emplace_back("10 determinism of report --all", [&] {
    Outcome o;
    const std::string a = cli::strip_volatile(report).dump(), b = cli::strip_volatile(again).dump();
    o.require(a == b, "the two reports differ");
    const auto ids = pot::fixture_ids();
    o.require(report.at("summary").at("fixtures").get<std::size_t>() == ids.size(), "summary count");
    o.require(report.at("reports").size() == ids.size(), "report count");
    return o;
  });

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %s", o.pass ? "PASS" : "FAIL", name.c_str());
    for (const auto& n : o.notes) std::printf("; %s", n.c_str());
    std::printf("\n");
  }
  std::filesystem::remove_all(dir);
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

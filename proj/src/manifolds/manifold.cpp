#include "lck/manifolds/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lck/simd/kernels.hpp"

namespace lck::mfd {

FlowMap::FlowMap(std::string name, VectorField generator, FlowBuilder builder, std::optional<double> period,
                 std::optional<int> closure)
    : name_(std::move(name)),
      generator_(std::move(generator)),
      builder_(std::move(builder)),
      period_(period),
      closure_(closure) {}

ChartMap FlowMap::at(double t) const { return ChartMap(dim(), builder_(ScalarField(t), calc::coordinates(dim()))); }

ChartMap FlowMap::spacetime() const {
  return ChartMap(dim() + 1, builder_(ScalarField::coordinate(dim()), calc::coordinates(dim())));
}

Point FlowMap::operator()(double t, const Point& p) const { return at(t)(p); }

const FlowMap& ModelManifold::flow(const std::string& name) const {
  auto it = flows.find(name);
  if (it == flows.end()) throw std::invalid_argument("no flow registered for field '" + name + "' on " + id);
  return it->second;
}

const VectorField& ModelManifold::field(const std::string& name) const {
  auto it = fields.find(name);
  if (it != fields.end()) return it->second;
  auto f = flows.find(name);
  if (f != flows.end()) return f->second.generator();
  throw std::invalid_argument("no field named '" + name + "' on " + id);
}

double ModelManifold::constant(const std::string& name) const {
  auto it = constants.find(name);
  if (it == constants.end()) throw std::invalid_argument("no constant named '" + name + "' on " + id);
  return it->second;
}

DifferentialForm ModelManifold::kahler_lift() const {
  if (!Omega) throw std::logic_error(id + " has no canonical LCK structure");
  return calc::exp(-phi) * *Omega;
}

FixtureId FixtureId::parse(const std::string& id) {
  FixtureId out;
  const auto colon = id.find(':');
  out.name = id.substr(0, colon);
  if (colon == std::string::npos) return out;
  std::stringstream rest(id.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("malformed fixture parameter '" + item + "'");
    out.params[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double FixtureId::number(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("parameter " + key + " is not a number");
  }
  if (used != it->second.size()) throw std::invalid_argument("parameter " + key + " is not a real number");
  return v;
}

calc::cplx FixtureId::complex_number(const std::string& key, calc::cplx fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::string s = it->second;
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  if (s.empty()) throw std::invalid_argument("parameter " + key + " is empty");
  if (s.back() != 'i') return {number(key, 0.0), 0.0};
  s.pop_back();
  // Split "a+b" / "a-b" at the last sign that is not an exponent sign.
  std::size_t split = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto parse = [&](const std::string& part) {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    std::size_t used = 0;
    const double v = std::stod(part, &used);
    if (used != part.size()) throw std::invalid_argument("parameter " + key + " is not a complex number");
    return v;
  };
  try {
    if (split == std::string::npos) return {0.0, parse(s)};
    return {parse(s.substr(0, split)), parse(s.substr(split))};
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("parameter " + key + " is not a complex number");
  }
}

std::vector<Point> sample_points(const ModelManifold& m, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample count must be positive");
  return m.sampler(count, seed);
}

double invariance_residual(const ModelManifold& m, const DifferentialForm& a, std::span<const Point> points) {
  double worst = 0.0;
  for (const auto& g : m.deck) worst = std::max(worst, calc::sup_norm(calc::pullback(g.map, a) - a, points));
  return worst;
}

double equivariance_residual(const ModelManifold& m, const DifferentialForm& a, std::span<const Point> points) {
  double worst = 0.0;
  for (const auto& g : m.deck) {
    const DifferentialForm diff = calc::pullback(g.map, a) - ScalarField(1.0 / g.rho) * a;
    worst = std::max(worst, calc::sup_norm(diff, points));
  }
  return worst;
}

double deck_quotient_check(const ModelManifold& m, const VectorField& X, std::span<const Point> points) {
  double worst = 0.0;
  for (const auto& g : m.deck) {
    for (const auto& p : points) {
      const Eigen::MatrixXd jac = g.map.jacobian(p);
      const auto xv = X.values(p);
      const Eigen::VectorXd pushed = jac * Eigen::Map<const Eigen::VectorXd>(xv.data(), xv.size());
      const auto at_image = X.values(g.map(p));
      for (int i = 0; i < pushed.size(); ++i) worst = std::max(worst, std::abs(pushed[i] - at_image[i]));
    }
  }
  return worst;
}

double deck_holomorphy_residual(const ModelManifold& m, std::span<const Point> points) {
  const int d = m.dim();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; j += 2) {
    J(j + 1, j) = 1.0;
    J(j, j + 1) = -1.0;
  }
  double worst = 0.0;
  for (const auto& g : m.deck) {
    for (const auto& p : points) {
      const Eigen::MatrixXd jac = g.map.jacobian(p);
      worst = std::max(worst, (jac * J - J * jac).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

const FlowMap& flow_of(const ModelManifold& m, const std::string& field) { return m.flow(field); }

namespace {

double point_distance(const Point& a, const Point& b) { return simd::max_abs_diff(a.coords(), b.coords()); }

}  // namespace

double flow_group_residual(const FlowMap& f, double s, double t, std::span<const Point> points) {
  double worst = 0.0;
  const ChartMap fs = f.at(s), ft = f.at(t), fst = f.at(s + t);
  for (const auto& p : points) worst = std::max(worst, point_distance(fst(p), fs(ft(p))));
  return worst;
}

double flow_generator_residual(const FlowMap& f, double t, std::span<const Point> points) {
  const ChartMap st = f.spacetime();
  const int d = f.dim();
  double worst = 0.0;
  for (const auto& p : points) {
    std::vector<double> pt(p.coords().begin(), p.coords().end());
    pt.push_back(t);
    calc::EvalContext ctx(pt);
    std::vector<double> image;
    for (int k = 0; k < d; ++k) image.push_back(st.components()[k].value(ctx));
    const auto gen = f.generator().values(Point(image));
    for (int k = 0; k < d; ++k) {
      const double dt = st.components()[k].jet(ctx, 1).d1(d);
      worst = std::max(worst, std::abs(dt - gen[k]));
    }
  }
  return worst;
}

double flow_closure_residual(const ModelManifold& m, const FlowMap& f, std::span<const Point> points) {
  if (!f.period() || !f.closure()) throw std::invalid_argument("flow " + f.name() + " is not periodic");
  const ChartMap end = f.at(*f.period());
  const int c = *f.closure();
  double worst = 0.0;
  for (const auto& p : points) {
    const Point target = c < 0 ? p : m.deck.at(c).map(p);
    worst = std::max(worst, point_distance(end(p), target));
  }
  return worst;
}

double segment_integral(const DifferentialForm& a, const Point& p, const Point& q, int nodes) {
  if (a.degree() != 1) throw std::invalid_argument("segment integrals need a 1-form");
  // Gauss-Legendre nodes by Newton iteration on P_n.
  std::vector<double> x(nodes), w(nodes);
  for (int i = 0; i < nodes; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (nodes + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= nodes; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = nodes * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  const int d = p.dim();
  std::vector<double> dir(d);
  for (int k = 0; k < d; ++k) dir[k] = q[k] - p[k];
  double total = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double s = 0.5 * (x[i] + 1.0);
    std::vector<double> at(d);
    for (int k = 0; k < d; ++k) at[k] = p[k] + s * dir[k];
    const auto v = a.values(Point(at));
    total += 0.5 * w[i] * simd::dot(v, dir);
  }
  return total;
}

std::vector<double> deck_loop_integrals(const ModelManifold& m, const DifferentialForm& a, const Point& p, int nodes) {
  std::vector<double> out;
  for (const auto& g : m.deck) out.push_back(segment_integral(a, p, g.map(p), nodes));
  return out;
}

}  // namespace lck::mfd

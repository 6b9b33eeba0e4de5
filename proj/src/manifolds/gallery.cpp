#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "lck/manifolds/manifold.hpp"

namespace lck::mfd {

namespace {

using calc::CField;
using calc::cplx;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    // Box-Muller; independent of the standard library's distribution code.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  std::vector<double> direction(int dim) {
    std::vector<double> v(dim);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (auto& x : v) {
        x = normal();
        n2 += x * x;
      }
    } while (n2 < 1e-12);
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& x : v) x *= inv;
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

ScalarField sum_of_squares(const std::vector<ScalarField>& x) {
  std::vector<ScalarField> sq;
  for (const auto& v : x) sq.push_back(v * v);
  std::vector<double> ones(sq.size(), 1.0);
  return calc::linear_combination(ones, sq);
}

DifferentialForm one_form_d(int dim, const ScalarField& f) {
  return calc::exterior_d(DifferentialForm::function(dim, f));
}

DifferentialForm ddc(int dim, const ScalarField& f) {
  return calc::exterior_d(calc::dc(DifferentialForm::function(dim, f)));
}

std::vector<CField> complex_coords(int n) {
  std::vector<CField> z;
  for (int j = 0; j < n; ++j) z.push_back(CField::z(j));
  return z;
}

std::vector<ScalarField> flatten(const std::vector<CField>& z) {
  std::vector<ScalarField> out;
  for (const auto& c : z) {
    out.push_back(c.re);
    out.push_back(c.im);
  }
  return out;
}

std::vector<CField> as_complex(const std::vector<ScalarField>& x) {
  std::vector<CField> z;
  for (std::size_t j = 0; j + 1 < x.size(); j += 2) z.emplace_back(x[j], x[j + 1]);
  return z;
}

// z -> e^{a t} z on every coordinate of C^n.
FlowBuilder scaling_flow(cplx a) {
  return [a](const ScalarField& t, const std::vector<ScalarField>& x) {
    const CField e = calc::exp(CField(a.real() * t, a.imag() * t));
    std::vector<CField> out;
    for (const auto& z : as_complex(x)) out.push_back(e * z);
    return flatten(out);
  };
}

// Real part of the holomorphic field a * sum_j z_j d/dz_j.
VectorField scaling_field(int n, cplx a) {
  std::vector<CField> coeffs;
  for (const auto& z : complex_coords(n)) coeffs.push_back(CField(a) * z);
  return calc::real_part(coeffs);
}

void register_flow(ModelManifold& m, FlowMap f) {
  const std::string name = f.name();
  m.flows.insert_or_assign(name, std::move(f));
}

Sampler hopf_annulus_sampler(int n, double beta) {
  return [n, beta](int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point> out;
    for (int i = 0; i < count; ++i) {
      // |z| = beta^u, u uniform: one fundamental annulus in log-radius.
      const double r = std::pow(beta, rng.uniform());
      auto v = rng.direction(2 * n);
      for (auto& c : v) c *= r;
      out.emplace_back(std::move(v));
    }
    return out;
  };
}

ModelManifold hopf_diag(const FixtureId& fid) {
  const int n = static_cast<int>(fid.number("n", 2));
  const double beta = fid.number("beta", 0.5);
  if (n < 1 || n > 4 || fid.number("n", 2) != n) throw std::invalid_argument("hopf_diag: n must be 1..4");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("hopf_diag: need 0 < beta < 1 (|beta| < 1)");
  const int dim = 2 * n;
  ModelManifold m;
  m.id = "hopf_diag:n=" + std::to_string(n) + ",beta=" + (fid.params.count("beta") ? fid.params.at("beta") : std::string("0.5"));
  m.n = n;
  const auto x = calc::coordinates(dim);
  const ScalarField r2 = sum_of_squares(x);
  m.contains = [dim](const Point& p) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += p[i] * p[i];
    return p.dim() == dim && s > 0.0;
  };
  // dd^c |z|^2 / |z|^2
  m.Omega = (1.0 / r2) * ddc(dim, r2);
  m.phi = -calc::log(r2);
  m.theta = one_form_d(dim, m.phi);
  std::vector<ScalarField> gx;
  for (const auto& xi : x) gx.push_back(beta * xi);
  m.deck.push_back({"gamma", ChartMap(dim, gx), 1.0 / (beta * beta)});
  m.sampler = hopf_annulus_sampler(n, beta);

  const VectorField B = scaling_field(n, -0.5);
  const VectorField A = B.J();
  register_flow(m, FlowMap("B", B, scaling_flow(-0.5), -2.0 * std::log(beta), 0));
  register_flow(m, FlowMap("A", A, scaling_flow(cplx(0.0, -0.5)), 4.0 * M_PI, -1));
  for (int j = 0; j < n; ++j) {
    std::vector<CField> coeffs(n, CField(0.0));
    coeffs[j] = CField(cplx(0.0, 1.0)) * CField::z(j);
    const std::string name = "rot" + std::to_string(j + 1);
    register_flow(m, FlowMap(name, calc::real_part(coeffs),
                             [j](const ScalarField& t, const std::vector<ScalarField>& xs) {
                               auto z = as_complex(xs);
                               z[j] = CField(calc::cos(t), calc::sin(t)) * z[j];
                               return flatten(z);
                             },
                             2.0 * M_PI, -1));
  }
  m.fields.emplace("C", B);
  m.fields.emplace("JC", A);
  m.torus = {"A", "B"};
  m.constants["beta"] = beta;
  m.constants["rho"] = 1.0 / (beta * beta);
  return m;
}

ModelManifold hopf_perturbed(const FixtureId& fid) {
  const double eps = fid.number("eps", 0.1);
  const double beta = fid.number("beta", 0.5);
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("hopf_perturbed: need 0 < beta < 1");
  if (!(std::abs(eps) <= 0.25)) throw std::invalid_argument("hopf_perturbed: need |eps| <= 0.25");
  const int n = 2, dim = 4;
  ModelManifold m;
  m.id = "hopf_perturbed:eps=" + (fid.params.count("eps") ? fid.params.at("eps") : std::string("0.1"));
  m.n = n;
  const auto x = calc::coordinates(dim);
  const ScalarField r2 = sum_of_squares(x);
  const CField z1 = CField::z(0), z2 = CField::z(1);
  // Homogeneous of degree 2 under real scaling, not invariant under rotation;
  // the z1^4 term makes omega(C, JC) vary along the rotation orbits.
  const ScalarField h = r2 + eps * (z1 * z1 * z1 * (z2.conj() + z1)).re / r2;
  m.contains = [](const Point& p) { return p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3] > 0.0; };
  m.Omega = (1.0 / h) * ddc(dim, h);
  m.phi = -calc::log(h);
  m.theta = one_form_d(dim, m.phi);
  std::vector<ScalarField> gx;
  for (const auto& xi : x) gx.push_back(beta * xi);
  m.deck.push_back({"gamma", ChartMap(dim, gx), 1.0 / (beta * beta)});
  m.sampler = hopf_annulus_sampler(n, beta);
  const VectorField C = scaling_field(n, -0.5);
  register_flow(m, FlowMap("C", C, scaling_flow(-0.5), -2.0 * std::log(beta), 0));
  register_flow(m, FlowMap("JC", C.J(), scaling_flow(cplx(0.0, -0.5)), 4.0 * M_PI, -1));
  m.torus = {"JC", "C"};
  m.constants["beta"] = beta;
  m.constants["eps"] = eps;
  return m;
}

ModelManifold hopf_nondiag(const FixtureId& fid) {
  const cplx beta = fid.complex_number("beta", cplx(0.4, 0.1));
  const cplx lambda = fid.complex_number("lambda", cplx(1.0, 0.0));
  const double mraw = fid.number("m", 2);
  const int m_exp = static_cast<int>(mraw);
  if (!(std::abs(beta) < 1.0) || std::abs(beta) == 0.0) {
    throw std::invalid_argument("hopf_nondiag: need 0 < |beta| < 1");
  }
  if (m_exp < 1 || m_exp != mraw || m_exp > 4) throw std::invalid_argument("hopf_nondiag: m must be in 1..4");
  if (std::abs(lambda) == 0.0) throw std::invalid_argument("hopf_nondiag: lambda must be nonzero");
  const int dim = 4;
  const cplx c = std::log(beta);
  const cplx b = lambda / std::pow(beta, m_exp);
  ModelManifold m;
  m.id = "hopf_nondiag";
  if (!fid.params.empty()) {
    m.id += ":";
    bool first = true;
    for (const auto& [k, v] : fid.params) {
      m.id += (first ? "" : ",") + k + "=" + v;
      first = false;
    }
  }
  m.n = 2;
  const CField z1 = CField::z(0), z2 = CField::z(1);
  const CField z1m = calc::pow_int(z1, m_exp);
  m.contains = [](const Point& p) { return p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3] > 0.0; };

  // Flow of W = a Z1 + b Z2 for real time t.
  auto w_flow = [m_exp](cplx a, cplx bb) -> FlowBuilder {
    return [a, bb, m_exp](const ScalarField& t, const std::vector<ScalarField>& x) {
      auto z = as_complex(x);
      const CField e1 = calc::exp(CField(a.real() * t, a.imag() * t));
      const CField em = calc::exp(CField(a.real() * m_exp * t, a.imag() * m_exp * t));
      const CField z1p = calc::pow_int(z[0], m_exp);
      return flatten({e1 * z[0], em * (z[1] + CField(bb) * CField(t) * z1p)});
    };
  };
  auto w_field = [&](cplx a, cplx bb) {
    return calc::real_part({CField(a) * z1, CField(a * double(m_exp)) * z2 + CField(bb) * z1m});
  };
  const cplx two_pi_i(0.0, 2.0 * M_PI);
  std::vector<ScalarField> deck_map = flatten({CField(beta) * z1, CField(std::pow(beta, m_exp)) * z2 + CField(lambda) * z1m});
  const double kappa = 2.0 * m_exp * c.real();
  m.deck.push_back({"gamma", ChartMap(dim, deck_map), std::exp(-kappa)});

  register_flow(m, FlowMap("xi1", w_field(two_pi_i, 0.0), w_flow(two_pi_i, 0.0), 1.0, -1));
  register_flow(m, FlowMap("xi2", w_field(c, b), w_flow(c, b), 1.0, 0));
  // A generic element of the Lie algebra and its J-rotation, for the complex-time flow check.
  const cplx wa(0.3, 0.5), wb(0.7, -0.2);
  const cplx i(0.0, 1.0);
  register_flow(m, FlowMap("W", w_field(wa, wb), w_flow(wa, wb)));
  register_flow(m, FlowMap("iW", w_field(i * wa, i * wb), w_flow(i * wa, i * wb)));
  m.fields.emplace("Z1", calc::real_part({z1, CField(double(m_exp)) * z2}));
  m.fields.emplace("Z2", calc::real_part({CField(0.0), z1m}));
  m.fields.emplace("iZ1", calc::real_part({CField(i) * z1, CField(i * double(m_exp)) * z2}));
  m.fields.emplace("iZ2", calc::real_part({CField(0.0), CField(i) * z1m}));

  // LCK structure with positive potential: tau solves Q(Phi^{xi2}_{-tau}(z)) = 1,
  // psi = exp(kappa tau), Omega = dd^c psi / psi, theta = -d ln psi.
  const double delta = 0.05;
  const auto x5 = calc::coordinates(dim + 1);
  const std::vector<ScalarField> x4(x5.begin(), x5.begin() + dim);
  const auto back = w_flow(c, b)(-x5[dim], x4);
  const ScalarField Q = back[0] * back[0] + back[1] * back[1] + delta * (back[2] * back[2] + back[3] * back[3]);
  const double rate = 2.0 * c.real();
  const ScalarField tau = calc::implicit_root(Q - 1.0, dim, [delta, rate](std::span<const double> p) {
    const double q = p[0] * p[0] + p[1] * p[1] + delta * (p[2] * p[2] + p[3] * p[3]);
    return std::log(q) / rate;
  });
  const ScalarField psi = calc::exp(kappa * tau);
  m.Omega = (1.0 / psi) * ddc(dim, psi);
  m.phi = -kappa * tau;
  m.theta = one_form_d(dim, m.phi);
  m.scalars.emplace("tau", tau);

  const FlowMap xi2 = m.flow("xi2");
  m.sampler = [xi2, delta](int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point> out;
    for (int k = 0; k < count; ++k) {
      auto v = rng.direction(4);
      const double q = v[0] * v[0] + v[1] * v[1] + delta * (v[2] * v[2] + v[3] * v[3]);
      for (auto& e : v) e /= std::sqrt(q);
      out.push_back(xi2(rng.uniform(), Point(v)));
    }
    return out;
  };
  m.torus = {"xi1", "xi2"};
  m.constants["kappa"] = kappa;
  m.constants["rho"] = std::exp(-kappa);
  m.constants["m"] = m_exp;
  m.constants["c_re"] = c.real();
  m.constants["c_im"] = c.imag();
  m.constants["b_re"] = b.real();
  m.constants["b_im"] = b.imag();
  m.constants["delta"] = delta;
  return m;
}

struct InoueData {
  double alpha;
  double a[2], b[2], c[2];
  double lambda0;
  int N[2][2];
};

InoueData inoue_constants(double p, double q, double r) {
  InoueData d{};
  d.N[0][0] = 2;
  d.N[0][1] = 1;
  d.N[1][0] = 1;
  d.N[1][1] = 1;
  Eigen::Matrix2d N;
  N << 2, 1, 1, 1;
  const double tr = N.trace();
  d.alpha = 0.5 * (tr + std::sqrt(tr * tr - 4.0));
  // Eigenvectors with first component 1: N v = mu v gives v2 = mu - n11 (n12 = 1).
  d.a[0] = 1.0;
  d.a[1] = (d.alpha - N(0, 0)) / N(0, 1);
  d.b[0] = 1.0;
  d.b[1] = (1.0 / d.alpha - N(0, 0)) / N(0, 1);
  d.lambda0 = (d.b[0] * d.a[1] - d.b[1] * d.a[0]) / r;
  Eigen::Vector2d rhs;
  for (int i = 0; i < 2; ++i) {
    const double n1 = N(i, 0), n2 = N(i, 1);
    const double e = 0.5 * n1 * (n1 - 1) * d.a[0] * d.b[0] + 0.5 * n2 * (n2 - 1) * d.a[1] * d.b[1] +
                     n1 * n2 * d.b[0] * d.a[1];
    rhs[i] = e + d.lambda0 * (i == 0 ? p : q);
  }
  // (c1, c2)(I - N^t) = rhs  <=>  (I - N) c = rhs
  const Eigen::Matrix2d M = Eigen::Matrix2d::Identity() - N;
  const Eigen::Vector2d c = M.fullPivLu().solve(rhs);
  d.c[0] = c[0];
  d.c[1] = c[1];
  return d;
}

ModelManifold inoue(const FixtureId& fid, bool with_deck) {
  const double p = fid.number("p", 0), q = fid.number("q", 0), r = fid.number("r", 1);
  const double t = fid.number("t", 0), t_im = fid.number("t_im", 0);
  if (r == 0.0) throw std::invalid_argument("inoue_splus: r must be nonzero");
  if (p != std::floor(p) || q != std::floor(q) || r != std::floor(r)) {
    throw std::invalid_argument("inoue_splus: p, q, r must be integers");
  }
  if (t_im != 0.0) throw std::invalid_argument("inoue_splus: the LCK metric needs real t");
  const InoueData d = inoue_constants(p, q, r);
  const int dim = 4;
  ModelManifold m;
  m.id = with_deck ? "inoue_splus" : "hxc_cover";
  if (!fid.params.empty()) {
    m.id += ":";
    bool first = true;
    for (const auto& [k, v] : fid.params) {
      m.id += (first ? "" : ",") + k + "=" + v;
      first = false;
    }
  }
  m.n = 2;
  const auto x = calc::coordinates(dim);
  const CField w = CField::z(0), z = CField::z(1);
  const ScalarField u = x[1], v = x[3];  // Im w, Im z
  m.contains = [](const Point& pt) { return pt.dim() == 4 && pt[1] > 0.0; };

  using calc::ComplexForm;
  const ComplexForm dw = ComplexForm::dz(dim, 0), dz = ComplexForm::dz(dim, 1);
  const ComplexForm dwb = dw.conj(), dzb = dz.conj();
  const CField A = (1.0 + v * v) / (u * u);
  const CField Bc = v / u;
  const ComplexForm inner = A * calc::wedge(dw, dwb) + (-Bc) * (calc::wedge(dw, dzb) + calc::wedge(dz, dwb)) +
                            calc::wedge(dz, dzb);
  // (i/2)(...) so that i_xi Omega = lambda0 d_theta Im z with xi = lambda0 d/dRe z.
  const ComplexForm omega = CField(cplx(0.0, 0.5)) * inner;
  m.Omega = omega.re;
  m.phi = calc::log(u);
  m.theta = one_form_d(dim, m.phi);

  if (with_deck) {
    m.deck.push_back({"g0", calc::chart_map(dim, {CField(d.alpha) * w, z + CField(t)}), d.alpha});
    for (int i = 0; i < 2; ++i) {
      m.deck.push_back({"g" + std::to_string(i + 1),
                        calc::chart_map(dim, {w + CField(d.a[i]), z + CField(d.b[i]) * w + CField(d.c[i])}), 1.0});
    }
    m.deck.push_back({"g3", calc::chart_map(dim, {w, z + CField(d.lambda0)}), 1.0});
  }
  const double l0 = d.lambda0;
  register_flow(m, FlowMap("xi", VectorField::constant({0, 0, l0, 0}),
                           [l0](const ScalarField& s, const std::vector<ScalarField>& xs) {
                             return std::vector<ScalarField>{xs[0], xs[1], xs[2] + l0 * s, xs[3]};
                           },
                           1.0, with_deck ? std::optional<int>(3) : std::nullopt));
  m.fields.emplace("Z", VectorField::constant({0, 0, 1, 0}));
  m.sampler = [](int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Point> out;
    for (int k = 0; k < count; ++k) {
      const double re_w = rng.uniform(-1, 1);
      const double im_w = std::pow(10.0, rng.uniform(-1, 1));
      out.push_back(Point{re_w, im_w, rng.uniform(-1, 1), rng.uniform(-1, 1)});
    }
    return out;
  };
  m.torus = {"xi"};
  m.constants["alpha"] = d.alpha;
  m.constants["lambda0"] = d.lambda0;
  m.constants["a1"] = d.a[0];
  m.constants["a2"] = d.a[1];
  m.constants["b1"] = d.b[0];
  m.constants["b2"] = d.b[1];
  m.constants["c1"] = d.c[0];
  m.constants["c2"] = d.c[1];
  m.constants["t"] = t;
  return m;
}

// Embeds a factor's field into the product through the slice [offset, offset + dim).
ScalarField shift(const ScalarField& f, int offset, int dim, const std::vector<ScalarField>& x) {
  std::vector<ScalarField> slice(x.begin() + offset, x.begin() + offset + dim);
  return f.compose(slice);
}

VectorField shift(const VectorField& X, int offset, int total, const std::vector<ScalarField>& x) {
  VectorField out(total);
  for (int i = 0; i < X.dim(); ++i) out[offset + i] = shift(X[i], offset, X.dim(), x);
  return out;
}

ModelManifold product(const FixtureId& fid) {
  auto factor = [&](const std::string& key) {
    auto it = fid.params.find(key);
    const std::string name = it == fid.params.end() ? "hopf_diag" : it->second;
    if (name == "product") throw std::invalid_argument("product: nested products are not supported");
    return gallery(name);
  };
  const ModelManifold a = factor("a"), b = factor("b");
  const int da = a.dim(), db = b.dim(), dim = da + db;
  ModelManifold m;
  m.id = "product:a=" + a.id + ",b=" + b.id;
  m.n = a.n + b.n;
  const auto x = calc::coordinates(dim);
  m.contains = [a, b, da, db](const Point& p) {
    std::vector<double> pa(p.coords().begin(), p.coords().begin() + da);
    std::vector<double> pb(p.coords().begin() + da, p.coords().begin() + da + db);
    return a.contains(Point(pa)) && b.contains(Point(pb));
  };
  auto embed_map = [&](const ChartMap& g, int offset, int d) {
    std::vector<ScalarField> comps(x);
    for (int i = 0; i < d; ++i) comps[offset + i] = shift(g.components()[i], offset, d, x);
    return ChartMap(dim, comps);
  };
  for (const auto& g : a.deck) m.deck.push_back({"a." + g.name, embed_map(g.map, 0, da), g.rho});
  for (const auto& g : b.deck) m.deck.push_back({"b." + g.name, embed_map(g.map, da, db), g.rho});
  m.phi = ScalarField(0.0);
  const int na = static_cast<int>(a.deck.size());
  auto embed_flow = [&](const FlowMap& f, int offset, int d, const std::string& prefix, int deck_offset) {
    FlowBuilder inner = f.builder();
    FlowBuilder builder = [inner, offset, d](const ScalarField& t, const std::vector<ScalarField>& xs) {
      std::vector<ScalarField> slice(xs.begin() + offset, xs.begin() + offset + d);
      auto img = inner(t, slice);
      std::vector<ScalarField> out(xs);
      for (int i = 0; i < d; ++i) out[offset + i] = img[i];
      return out;
    };
    std::optional<int> closure;
    if (f.closure()) closure = *f.closure() < 0 ? -1 : *f.closure() + deck_offset;
    register_flow(m, FlowMap(prefix + f.name(), shift(f.generator(), offset, dim, x), builder, f.period(), closure));
  };
  for (const auto& [name, f] : a.flows) embed_flow(f, 0, da, "a.", 0);
  for (const auto& [name, f] : b.flows) embed_flow(f, da, db, "b.", na);
  for (const auto& t : a.torus) m.torus.push_back("a." + t);
  for (const auto& t : b.torus) m.torus.push_back("b." + t);
  const Sampler sa = a.sampler, sb = b.sampler;
  m.sampler = [sa, sb](int count, std::uint64_t seed) {
    auto pa = sa(count, seed);
    auto pb = sb(count, seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Point> out;
    for (int i = 0; i < count; ++i) {
      std::vector<double> v(pa[i].coords().begin(), pa[i].coords().end());
      v.insert(v.end(), pb[i].coords().begin(), pb[i].coords().end());
      out.emplace_back(std::move(v));
    }
    return out;
  };
  return m;
}

}  // namespace

std::vector<std::string> gallery_ids() {
  return {"hopf_diag", "hopf_nondiag", "hopf_perturbed", "hxc_cover", "inoue_splus", "product"};
}

ModelManifold gallery(const std::string& id) {
  const FixtureId fid = FixtureId::parse(id);
  if (fid.name == "hopf_diag") return hopf_diag(fid);
  if (fid.name == "hopf_nondiag") return hopf_nondiag(fid);
  if (fid.name == "hopf_perturbed") return hopf_perturbed(fid);
  if (fid.name == "inoue_splus") return inoue(fid, true);
  if (fid.name == "hxc_cover") return inoue(fid, false);
  if (fid.name == "product") return product(fid);
  throw UnknownFixture("unknown fixture '" + fid.name + "'");
}

}  // namespace lck::mfd

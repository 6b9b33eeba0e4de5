#include "lck/torus/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "lck/calculus/errors.hpp"

namespace lck::torus {

TorusAction TorusAction::of(const ModelManifold& m, std::vector<std::string> names) {
  if (names.empty()) names = m.torus;
  if (names.empty()) throw std::invalid_argument(m.id + " registers no torus");
  TorusAction act;
  act.manifold_ = &m;
  for (const auto& n : names) {
    const FlowMap& f = m.flow(n);
    if (!f.period() || !f.closure()) throw std::invalid_argument("generator " + n + " is not periodic");
    act.circles_.push_back(f);
  }
  act.names_ = names;
  act.coeffs_ = Eigen::MatrixXd::Identity(names.size(), names.size());
  return act;
}

VectorField TorusAction::generator(int i) const {
  VectorField X(manifold_->dim());
  for (int j = 0; j < static_cast<int>(circles_.size()); ++j) {
    if (coeffs_(i, j) != 0.0) X = X + calc::ScalarField(coeffs_(i, j)) * circles_[j].generator();
  }
  return X;
}

TorusAction TorusAction::recombined(const Eigen::MatrixXd& R) const {
  if (R.rows() != R.cols() || R.rows() != coeffs_.rows()) throw std::invalid_argument("recombination must be square");
  TorusAction out = *this;
  out.coeffs_ = R * coeffs_;
  out.names_.clear();
  for (int i = 0; i < R.rows(); ++i) out.names_.push_back("g" + std::to_string(i + 1));
  return out;
}

double TorusAction::commutation_residual(std::span<const Point> points) const {
  double worst = 0.0;
  for (int i = 0; i < size(); ++i) {
    for (int j = i + 1; j < size(); ++j) {
      const VectorField b = calc::bracket(generator(i), generator(j));
      for (const auto& p : points) {
        for (double v : b.values(p)) worst = std::max(worst, std::abs(v));
      }
    }
  }
  return worst;
}

double TorusAction::period_residual(std::span<const Point> points) const {
  double worst = 0.0;
  for (const auto& c : circles_) worst = std::max(worst, mfd::flow_closure_residual(*manifold_, c, points));
  return worst;
}

DifferentialForm average_over_action(const DifferentialForm& a, const TorusAction& act, int nodes) {
  if (nodes < 8) throw std::invalid_argument("averaging needs at least 8 nodes");
  DifferentialForm current = a;
  for (const auto& c : act.circles()) {
    if (!c.period()) throw std::invalid_argument("generator " + c.name() + " is not periodic");
    const double P = *c.period();
    DifferentialForm sum(a.dim(), a.degree());
    for (int k = 0; k < nodes; ++k) sum += calc::pullback(c.at(P * k / nodes), current);
    current = calc::ScalarField(1.0 / nodes) * sum;
  }
  return current;
}

int intersection_dimension(const TorusAction& act, std::span<const Point> points) {
  const int k = act.size();
  std::vector<VectorField> gens;
  for (int i = 0; i < k; ++i) gens.push_back(act.generator(i));
  std::optional<int> result;
  for (const auto& p : points) {
    const int d = gens[0].dim();
    Eigen::MatrixXd M(d, 2 * k);
    for (int i = 0; i < k; ++i) {
      const auto v = gens[i].values(p);
      const auto jv = calc::apply_J(v);
      for (int r = 0; r < d; ++r) {
        M(r, i) = v[r];
        M(r, k + i) = jv[r];
      }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    const double cutoff = 1e-8 * (s.size() ? s[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i) rank += s[i] > cutoff ? 1 : 0;
    const int dim = 2 * k - rank;
    if (result && *result != dim) {
      throw NumericalError("stratified action, refine samples", {p.coords().begin(), p.coords().end()});
    }
    result = dim;
  }
  if (!result) throw std::invalid_argument("intersection_dimension needs sample points");
  return *result;
}

std::vector<GeneratorPairing> classify_vertical(const TorusAction& act, const DifferentialForm& theta,
                                                std::span<const Point> points, int nodes) {
  if (nodes < 8) throw std::invalid_argument("averaging needs at least 8 nodes");
  // The generators commute with every circle, so the averaged pairing at p is
  // the mean of theta(xi) over the orbit grid through p.
  struct Sample {
    std::vector<double> theta, xi;
  };
  std::vector<std::vector<Sample>> grids;
  std::vector<VectorField> gens;
  for (int i = 0; i < act.size(); ++i) gens.push_back(act.generator(i));
  for (const auto& p : points) {
    std::vector<Point> grid{p};
    for (const auto& c : act.circles()) {
      const double P = *c.period();
      std::vector<Point> next;
      for (const auto& q : grid) {
        for (int k = 0; k < nodes; ++k) next.push_back(c(P * k / nodes, q));
      }
      grid = std::move(next);
    }
    std::vector<Sample> samples;
    for (const auto& q : grid) {
      Sample s{theta.values(q), {}};
      for (const auto& X : gens) {
        const auto v = X.values(q);
        s.xi.insert(s.xi.end(), v.begin(), v.end());
      }
      samples.push_back(std::move(s));
    }
    grids.push_back(std::move(samples));
  }
  const int d = theta.dim();
  std::vector<GeneratorPairing> out;
  for (int i = 0; i < act.size(); ++i) {
    double lo = INFINITY, hi = -INFINITY, sum = 0.0;
    for (const auto& grid : grids) {
      double v = 0.0;
      for (const auto& s : grid) {
        for (int k = 0; k < d; ++k) v += s.theta[k] * s.xi[i * d + k];
      }
      v /= static_cast<double>(grid.size());
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    GeneratorPairing g{act.name(i), sum / static_cast<double>(points.size()), hi - lo, false};
    if (g.spread > 1e-8) {
      throw NumericalError("theta(" + g.name + ") is not constant after averaging");
    }
    g.vertical = std::abs(g.pairing) > 1e-6;
    out.push_back(g);
  }
  return out;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::NoLCKPossible: return "NoLCKPossible";
    case Verdict::VaismanExists: return "VaismanExists";
    case Verdict::PositivePotentialExists: return "PositivePotentialExists";
    case Verdict::PurelyReal: return "PurelyReal";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

ActionReport verdict(const TorusAction& act, const st::LCKStructure* s, std::span<const Point> points, int nodes) {
  ActionReport r;
  std::string gens;
  for (int i = 0; i < act.size(); ++i) gens += (i ? "," : "") + act.name(i);
  try {
    r.intersection_dim = intersection_dimension(act, points);
  } catch (const NumericalError& e) {
    r.verdict = Verdict::Inconclusive;
    r.witnesses.push_back(std::string("rank of [Xi|JXi] varies over samples: ") + e.what());
    return r;
  }
  r.witnesses.push_back("dim(t∩Jt) = " + std::to_string(r.intersection_dim) + " for generators {" + gens + "}");
  if (r.intersection_dim > 2) {
    r.verdict = Verdict::NoLCKPossible;
    return r;
  }
  if (r.intersection_dim >= 1) {
    r.verdict = Verdict::VaismanExists;
    return r;
  }
  const int n = act.manifold().n;
  if (s && act.size() == n) {
    try {
      r.pairings = classify_vertical(act, s->theta(), points, nodes);
    } catch (const NumericalError& e) {
      r.verdict = Verdict::Inconclusive;
      r.witnesses.push_back(e.what());
      return r;
    }
    for (const auto& g : r.pairings) {
      if (g.vertical) {
        r.verdict = Verdict::PositivePotentialExists;
        r.witnesses.push_back("vertical generator " + g.name + ": theta = " + fmt("%.6g", g.pairing));
        return r;
      }
    }
    r.witnesses.push_back("every generator is horizontal");
  } else if (!s) {
    r.witnesses.push_back("no LCK structure supplied");
  } else {
    r.witnesses.push_back(std::to_string(act.size()) + " generators, complex dimension " + std::to_string(n));
  }
  r.verdict = Verdict::PurelyReal;
  return r;
}

double isotropy_residual(const TorusAction& act, const st::LCKStructure& s, std::span<const Point> points,
                         int nodes) {
  for (const auto& g : classify_vertical(act, s.theta(), points, nodes)) {
    if (g.vertical) throw std::invalid_argument("isotropy applies to horizontal actions");
  }
  double worst = 0.0;
  for (int i = 0; i < act.size(); ++i) {
    const VectorField Xi = act.generator(i);
    for (int j = i; j < act.size(); ++j) {
      const VectorField Xj = act.generator(j);
      for (const auto& p : points) {
        worst = std::max(worst, std::abs(s.omega().evaluate(p, {Xi.values(p), Xj.values(p)})));
      }
    }
  }
  return worst;
}

}  // namespace lck::torus

#include "hrg/gaussian_field.hpp"

#include <algorithm>
#include <cmath>

#include "hrg/error.hpp"
#include "hrg/mobius.hpp"

namespace hrg {

void CovarianceSpec::validate() const {
  model.validate();
  if (l < 1) throw ConfigError("l must be at least 1");
}

double vertex_covariance(const Window& w, const BallAddress& u, const BallAddress& v, const CovarianceSpec& spec) {
  w.validate(u);
  w.validate(v);
  if (u.k != v.k || u.k >= w.S()) return 0.0;
  if (spec.r_uv && u.k < *spec.r_uv) return 0.0;
  if (!std::equal(u.path.begin(), u.path.end() - 1, v.path.begin())) return 0.0;
  const double s2 = spec.model.layer_variance(u.k);
  const double b = spec.model.block();
  return u == v ? (1.0 - 1.0 / b) * s2 : -s2 / b;
}

double layer_band_covariance(const ModelParams& m, int join, int lo, int hi) {
  if (lo == INT_MIN && join == INT_MIN) throw DomainError("pointwise variance diverges without a UV cutoff");
  const int from = std::max(join, lo);
  double c = 0.0;
  if (hi == INT_MAX) {
    c = m.tail_variance(from);
  } else {
    for (int j = from; j < hi; ++j) c += m.vertex_variance(j);
  }
  if (join != INT_MIN && lo <= join - 1 && join - 1 < hi) c -= m.layer_variance(join - 1) / m.block();
  return c;
}

double covariance_exact(const PAdicPoint& x, const PAdicPoint& y, const CovarianceSpec& spec) {
  const PNorm n = distance(x, y);
  const int lo = spec.r_uv ? *spec.r_uv : INT_MIN;
  if (n.zero && !spec.r_uv) throw DomainError("covariance at coincident points diverges without a UV cutoff");
  if (!spec.r_uv) return spec.model.c0() * std::pow(static_cast<double>(spec.model.p), -kLayerVarianceExponent * spec.dim_phi() * n.exp);
  return layer_band_covariance(spec.model, n.zero ? INT_MIN : n.exp, lo);
}

MobiusCovariance mobius_covariance(const MobiusWord& f, const PAdicPoint& x, const PAdicPoint& y,
                                   const ModelParams& m) {
  const ExtPoint fx = f.apply(x), fy = f.apply(y);
  if (!fx || !fy) throw DomainError("conformal map sends a point to infinity");
  const PNorm before = distance(x, y), after = distance(*fx, *fy);
  if (before.zero || after.zero) throw DomainError("coincident points");
  const int two_d = 2 * m.d;
  MobiusCovariance r;
  r.lhs_exponent = f.jacobian_exponent(x) + f.jacobian_exponent(y) - two_d * after.exp;
  r.rhs_exponent = -two_d * before.exp;
  const double unit = m.dim_phi() / m.d, p = m.p;
  r.lhs = std::pow(p, unit * (f.jacobian_exponent(x) + f.jacobian_exponent(y))) * m.c0() *
          std::pow(p, -kLayerVarianceExponent * m.dim_phi() * after.exp);
  r.rhs = m.c0() * std::pow(p, -kLayerVarianceExponent * m.dim_phi() * before.exp);
  return r;
}

RadialKernel RadialKernel::covariance(const CovarianceSpec& spec) {
  RadialKernel k;
  k.p = spec.model.p;
  k.d = spec.model.d;
  k.amp = spec.model.c0();
  k.alpha = kLayerVarianceExponent * spec.dim_phi();
  k.cutoff = spec.r_uv;
  if (spec.r_uv) k.plateau = spec.model.tail_variance(*spec.r_uv);
  return k;
}

RadialKernel RadialKernel::squared(const CovarianceSpec& spec) {
  RadialKernel k = covariance(spec);
  k.amp *= k.amp;
  k.alpha *= 2.0;
  k.plateau *= k.plateau;
  return k;
}

double RadialKernel::operator()(int k) const {
  if (cutoff && k <= *cutoff) return plateau;
  return amp * std::pow(static_cast<double>(p), -alpha * k);
}

double RadialKernel::self_integral(int k) const {
  const double P = p, D = d;
  auto vol2 = [&](int j) { return std::pow(P, 2.0 * j * D); };
  if (!cutoff) {
    if (alpha >= d) throw DomainError("kernel is not locally integrable (alpha >= d)");
    return amp * (1.0 - std::pow(P, -D)) * std::pow(P, k * (2.0 * D - alpha)) / (1.0 - std::pow(P, -(D - alpha)));
  }
  if (k <= *cutoff) return vol2(k) * plateau;
  double I = vol2(*cutoff) * plateau;
  for (int j = *cutoff + 1; j <= k; ++j) I = std::pow(P, D) * I + vol2(j) * (1.0 - std::pow(P, -D)) * (*this)(j);
  return I;
}

double RadialKernel::pair_integral(const Window& w, const BallAddress& a, const BallAddress& b) const {
  const double va = ball_volume(p, d, a.k), vb = ball_volume(p, d, b.k);
  if (w.disjoint(a, b)) return va * vb * (*this)(w.join_layer(a, b));
  const BallAddress& small = a.k <= b.k ? a : b;
  const BallAddress& big = a.k <= b.k ? b : a;
  double s = self_integral(small.k);
  const double vs = ball_volume(p, d, small.k);
  for (int j = small.k; j < big.k; ++j) s += vs * (std::pow(static_cast<double>(p), d) - 1.0) * ball_volume(p, d, j) * (*this)(j + 1);
  return s;
}

double smeared(const Window& w, const BallFunction& f, const BallFunction& g, const RadialKernel& k) {
  check_disjoint(w, f);
  check_disjoint(w, g);
  double s = 0.0;
  for (const auto& [a, ca] : f.terms)
    for (const auto& [b, cb] : g.terms) s += ca * cb * k.pair_integral(w, a, b);
  return s;
}

double covariance_smeared(const Window& w, const BallFunction& f, const BallFunction& g, const CovarianceSpec& spec) {
  return smeared(w, f, g, RadialKernel::covariance(spec));
}

std::vector<double> FieldConfig::leaf_field() const {
  const std::int64_t b = ipow(p, d);
  const std::int64_t n = ipow(b, S);
  std::vector<double> phi(n, root_field);
  for (int k = 0; k < S; ++k) {
    const std::int64_t stride = ipow(b, k);
    for (std::int64_t i = 0; i < n; ++i) phi[i] += zeta[k][i / stride];
  }
  return phi;
}

void FieldConfig::write_csv(std::ostream& os, const Window& w) const {
  os << "layer,path,zeta\n";
  for (int k = 0; k < S; ++k)
    for (std::size_t i = 0; i < zeta[k].size(); ++i)
      os << k << ",\"" << w.address(k, static_cast<std::int64_t>(i)).to_string() << "\"," << zeta[k][i] << "\n";
  os << S << ",\"" << w.root().to_string() << "\"," << root_field << "\n";
}

FieldConfig sample_field(const Window& w, const CovarianceSpec& spec, std::mt19937_64& rng) {
  FieldConfig f;
  f.p = w.p();
  f.d = w.d();
  f.S = w.S();
  const int b = w.branching();
  const int lo = spec.r_uv ? std::max(0, *spec.r_uv) : 0;
  std::normal_distribution<double> normal;
  f.zeta.resize(w.S());
  for (int k = 0; k < w.S(); ++k) {
    f.zeta[k].assign(w.layer_size(k), 0.0);
    if (k < lo) continue;
    const double s = std::sqrt(spec.model.layer_variance(k));
    for (std::size_t base = 0; base < f.zeta[k].size(); base += b) {
      double mean = 0.0;
      for (int c = 0; c < b; ++c) mean += (f.zeta[k][base + c] = s * normal(rng));
      mean /= b;
      for (int c = 0; c < b; ++c) f.zeta[k][base + c] -= mean;
    }
  }
  f.root_field = std::sqrt(spec.model.tail_variance(w.S())) * normal(rng);
  return f;
}

PsdReport psd_report(const Eigen::MatrixXd& m, double rel_tol) {
  PsdReport r;
  r.matrix = m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolve failed");
  r.eigenvalues = es.eigenvalues();
  r.min_eigenvalue = r.eigenvalues.size() ? r.eigenvalues.minCoeff() : 0.0;
  r.norm = r.eigenvalues.size() ? r.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  r.psd = r.min_eigenvalue >= -rel_tol * r.norm;
  return r;
}

Eigen::MatrixXd leaf_covariance(const Window& w, const ModelParams& m, int lo, int hi) {
  const std::int64_t n = w.leaf_count();
  const std::int64_t b = w.branching();
  Eigen::MatrixXd c(n, n);
  for (std::int64_t i = 0; i < n; ++i) {
    c(i, i) = layer_band_covariance(m, INT_MIN, lo, hi);
    for (std::int64_t j = i + 1; j < n; ++j) {
      int join = 0;
      for (std::int64_t a = i, bb = j; a != bb; a /= b, bb /= b) ++join;
      c(i, j) = c(j, i) = layer_band_covariance(m, join, lo, hi);
    }
  }
  return c;
}

PsdReport gamma_psd_check(const Window& w, const CovarianceSpec& spec) {
  return psd_report(leaf_covariance(w, spec.model, 0, spec.l));
}

void check_positive_support(const Window& w, const BallFunction& f) {
  if (w.p() == 2) throw ConfigError("reflection positivity tests need odd p");
  check_disjoint(w, f);
  for (const auto& [u, c] : f.terms) {
    const PAdicPoint x = w.center(u);
    if (x[0].is_zero() || -x[0].valuation() <= u.k)
      throw DomainError("test function ball " + u.to_string() + " meets the reflection hyperplane");
    if (sign(x) != 1) throw DomainError("test function ball " + u.to_string() + " lies on the negative side");
  }
}

BallAddress reflect(const Window& w, const BallAddress& u) {
  return w.ball_of(reflect(w.center(u)), u.k);
}

PsdReport os_gram(const Window& w, const std::vector<BallFunction>& fns, const CovarianceSpec& spec) {
  for (const auto& f : fns) check_positive_support(w, f);
  const RadialKernel kernel = RadialKernel::covariance(spec);
  const int n = static_cast<int>(fns.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    BallFunction ri;
    for (const auto& [u, c] : fns[i].terms) ri.terms.emplace_back(reflect(w, u), c);
    for (int j = 0; j < n; ++j) m(i, j) = smeared(w, ri, fns[j], kernel);
  }
  return psd_report(m);
}

namespace {

std::vector<BallAddress> positive_balls(const Window& w, int k) {
  std::vector<BallAddress> out;
  for (std::int64_t i = 0; i < w.layer_size(k); ++i) {
    const BallAddress u = w.address(k, i);
    try {
      check_positive_support(w, BallFunction{{{u, 1.0}}});
      out.push_back(u);
    } catch (const DomainError&) {
    }
  }
  return out;
}

}  // namespace

std::vector<BallFunction> positive_unit_indicators(const Window& w) {
  std::vector<BallFunction> out;
  for (const auto& u : positive_balls(w, 0)) out.push_back(BallFunction{{{u, 1.0}}});
  return out;
}

OsWitness search_cutoff_witness(const Window& w, const CovarianceSpec& spec, int trials, int max_fns,
                                std::mt19937_64& rng) {
  std::vector<std::vector<BallAddress>> by_layer;
  for (int k = 0; k < w.S(); ++k) by_layer.push_back(positive_balls(w, k));
  std::normal_distribution<double> coef;
  std::uniform_int_distribution<int> n_fns(2, std::max(2, max_fns)), n_terms(1, 3), layer(0, w.S() - 1);
  OsWitness best;
  best.relative_min = INFINITY;
  for (int t = 0; t < trials; ++t) {
    std::vector<BallFunction> fns(n_fns(rng));
    for (auto& f : fns) {
      const int terms = n_terms(rng);
      for (int attempt = 0; attempt < 20 && static_cast<int>(f.terms.size()) < terms; ++attempt) {
        const auto& pool = by_layer[layer(rng)];
        if (pool.empty()) continue;
        const BallAddress u = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
        const bool clash = std::any_of(f.terms.begin(), f.terms.end(),
                                       [&](const auto& tc) { return !w.disjoint(tc.first, u); });
        if (!clash) f.terms.emplace_back(u, coef(rng));
      }
    }
    PsdReport r = os_gram(w, fns, spec);
    const double rel = r.norm > 0 ? r.min_eigenvalue / r.norm : 0.0;
    if (rel < best.relative_min) {
      best.fns = std::move(fns);
      best.report = std::move(r);
      best.relative_min = rel;
    }
  }
  best.trials = trials;
  return best;
}

WickVariance wick_square_smeared_variance(const Window& w, const BallFunction& f, int r, const CovarianceSpec& spec) {
  CovarianceSpec s = spec;
  s.r_uv = r;
  WickVariance out;
  out.value = 2.0 * smeared(w, f, f, RadialKernel::squared(s));
  if (2.0 * kLayerVarianceExponent * spec.dim_phi() >= spec.model.d)
    out.warning = "4[phi] >= d: the variance diverges as the cutoff is removed";
  return out;
}

}  // namespace hrg

#include "hrg/rg_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hrg/error.hpp"
#include "hrg/parallel.hpp"

namespace hrg {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Fluctuation scale per layer in units of the incoming field: p^(-[phi]).
double layer_ratio(const RGParams& params) {
  return std::pow(static_cast<double>(params.model.p), -params.dim_phi());
}

void check_mass(const BoltzmannFactor& f, double variance) {
  const auto& g = f.grid;
  double best = -HUGE_VAL;
  for (int i = 0; i < g.size(); ++i) {
    const double w = f.log_f[i] - g.node(i) * g.node(i) / (2.0 * variance);
    if (std::isnan(w)) throw NumericError("Boltzmann factor has NaN entries");
    best = std::max(best, w);
  }
  const double edge = std::max(f.log_f.front(), f.log_f.back()) -
                      g.phi_max() * g.phi_max() / (2.0 * variance);
  if (edge > best - 20.0)
    throw GridOverflowError("Boltzmann factor carries weight at the grid edge; enlarge phi_max");
}

// One layer of the nested block: input table on grid `in` with fluctuation
// scale sigma, output sampled at s_out * psi_i for psi >= 0. Returns the full
// (mirrored, gauge-normalized) output; fills Jacobian rows when jac != nullptr.
std::vector<double> layer(const RGParams& params, const SymmetricGrid& base, const SymmetricGrid& in,
                          const std::vector<double>& values, double sigma, double s_out,
                          Eigen::MatrixXd* jac) {
  const int n = in.size();
  const int m = in.center();
  ZeroSumBlock block(params.model.block(), sigma, params.block);
  std::vector<double> out(n);
  std::vector<std::vector<double>> rows(jac ? n - m : 0);
  parallel_for(n - m, [&](int k) {
    const double a = s_out * base.node(m + k);
    std::vector<double>* grad = nullptr;
    if (jac) {
      rows[k].assign(n, 0.0);
      grad = &rows[k];
    }
    out[m + k] = block.evaluate_with_gradient(a, in, values, grad);
  });
  const double zero = out[m];
  for (int k = 0; k <= m; ++k) {
    out[m + k] -= (k == 0 ? 0.0 : zero);
    out[m - k] = out[m + k];
  }
  out[m] = 0.0;
  if (jac) {
    jac->setZero(n, n);
    for (int k = 1; k <= m; ++k)
      for (int j = 0; j < n; ++j) {
        const double v = rows[k][j] - rows[0][j];
        (*jac)(m + k, j) = v;
        (*jac)(m - k, j) = v;
      }
  }
  return out;
}

std::vector<double> run_layers(const BoltzmannFactor& f, const RGParams& params, Eigen::MatrixXd* jac) {
  const double r = layer_ratio(params);
  std::vector<double> values = f.log_f;
  Eigen::MatrixXd total, lj;
  for (int j = 0; j < params.l; ++j) {
    const double s_in = std::pow(r, j);
    const SymmetricGrid in = f.grid.scaled(s_in);
    values = layer(params, f.grid, in, values, std::sqrt(params.model.layer_variance(j)), s_in * r,
                   jac ? &lj : nullptr);
    if (jac) total = (j == 0) ? lj : Eigen::MatrixXd(lj * total);
  }
  if (jac) *jac = total;
  return values;
}

}  // namespace

double RGParams::field_scale() const {
  return std::pow(static_cast<double>(model.p), -l * dim_phi());
}

void RGParams::validate() const {
  model.validate();
  if (l < 1) throw ConfigError("l must be at least 1");
  if (grid_n < 5 || grid_n % 2 == 0) throw ConfigError("grid N must be odd and at least 5");
  if (!(phi_max > 0.0)) throw ConfigError("phi_max must be positive");
  if (backend == Backend::kMonteCarlo && mc_samples < 2) throw ConfigError("mc_samples must be >= 2");
}

BoltzmannFactor BoltzmannFactor::constant(const SymmetricGrid& g) {
  return BoltzmannFactor{g, std::vector<double>(g.size(), 0.0)};
}

void BoltzmannFactor::normalize() {
  const double z = log_f[grid.center()];
  for (auto& v : log_f) v -= z;
}

double BoltzmannFactor::max_asymmetry() const {
  double worst = 0.0;
  const int n = grid.size();
  for (int i = 0; i < n; ++i) worst = std::max(worst, std::fabs(log_f[i] - log_f[n - 1 - i]));
  return worst;
}

double wick_monomial(int n, double a, double x) {
  if (n == 0) return 1.0;
  double h0 = 1.0, h1 = x;
  for (int k = 1; k < n; ++k) {
    const double h2 = x * h1 - k * a * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double WickPolynomial::potential(double x) const {
  double v = 0.0;
  for (int n = 1; n <= order(); ++n)
    if (c[n] != 0.0) v += c[n] * wick_monomial(n, variance, x);
  return v;
}

BoltzmannFactor WickPolynomial::to_grid(const SymmetricGrid& grid) const {
  return BoltzmannFactor::from_function(grid, [&](double x) { return -potential(x); });
}

WickPolynomial quartic(double g, double mu, double variance, int order) {
  if (order < 4) throw ConfigError("Wick polynomial order must be at least 4");
  WickPolynomial w;
  w.variance = variance;
  w.c.assign(order + 1, 0.0);
  w.c[2] = mu;
  w.c[4] = g;
  return w;
}

WickPolynomial wick_projection(const BoltzmannFactor& f, double variance, int order) {
  WickPolynomial w;
  w.variance = variance;
  w.c.assign(order + 1, 0.0);
  const auto& g = f.grid;
  const double norm = g.spacing() / std::sqrt(2.0 * std::numbers::pi * variance);
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.node(i);
    const double weight = norm * std::exp(-x * x / (2.0 * variance)) * (-f.log_f[i]);
    if (weight == 0.0) continue;
    for (int n = 0; n <= order; n += 2) w.c[n] += weight * wick_monomial(n, variance, x);
  }
  for (int n = 2; n <= order; n += 2) w.c[n] /= factorial(n) * std::pow(variance, n);
  return w;
}

BoltzmannFactor rg_step(const BoltzmannFactor& f, const RGParams& params) {
  params.validate();
  if (params.backend == Backend::kMonteCarlo) {
    const auto est = rg_block_monte_carlo(f, params);
    const int m = f.grid.center();
    BoltzmannFactor out = BoltzmannFactor::constant(f.grid);
    for (int k = 0; k <= m; ++k) {
      if (!(est[k].mean > 0.0)) throw NumericError("Monte Carlo block estimate is not positive");
      out.log_f[m + k] = out.log_f[m - k] = std::log(est[k].mean / est[0].mean);
    }
    return out;
  }
  check_mass(f, params.model.wick_variance());
  BoltzmannFactor out{f.grid, run_layers(f, params, nullptr)};
  for (double v : out.log_f)
    if (!std::isfinite(v)) throw NumericError("RG step produced non-finite values");
  return out;
}

std::vector<double> rg_block_log_expectation(const BoltzmannFactor& f, const RGParams& params) {
  if (params.l != 1) throw ConfigError("block expectations are defined for l = 1");
  const int m = f.grid.center();
  const double r = layer_ratio(params);
  ZeroSumBlock block(params.model.block(), 1.0, params.block);
  std::vector<double> out(m + 1);
  parallel_for(m + 1, [&](int k) {
    out[k] = block.evaluate_with_gradient(r * f.grid.node(m + k), f.grid, f.log_f, nullptr);
  });
  return out;
}

std::vector<McEstimate> rg_block_monte_carlo(const BoltzmannFactor& f, const RGParams& params) {
  if (params.l != 1) throw ConfigError("Monte Carlo backend supports l = 1 only");
  const int m = f.grid.center();
  const double r = layer_ratio(params);
  ZeroSumBlock block(params.model.block(), 1.0, params.block);
  std::mt19937_64 rng(params.mc_seed);
  std::vector<std::vector<double>> draws(params.mc_samples);
  for (auto& z : draws) z = block.draw(rng);
  const std::vector<BlockFactor> factors{{[&](double x) { return f(x); }, block.size()}};
  std::vector<McEstimate> out(m + 1);
  parallel_for(m + 1, [&](int k) { out[k] = block.monte_carlo(r * f.grid.node(m + k), factors, draws); });
  return out;
}

Eigen::MatrixXd rg_jacobian(const BoltzmannFactor& f, const RGParams& params) {
  params.validate();
  if (params.backend != Backend::kFourier) throw ConfigError("Jacobian needs the Fourier backend");
  Eigen::MatrixXd full;
  run_layers(f, params, &full);
  const int m = f.grid.center();
  Eigen::MatrixXd half(m, m);
  for (int i = 1; i <= m; ++i)
    for (int k = 1; k <= m; ++k) half(i - 1, k - 1) = full(m + i, m + k) + full(m + i, m - k);
  return half;
}

WickPolynomial rg_step_poly(const WickPolynomial& w, const RGParams& params, int order) {
  params.validate();
  if (order < 4 || order % 2) throw ConfigError("truncation order must be even and at least 4");
  if (w.order() > order) throw ConfigError("input polynomial exceeds the truncation order");
  const int b = params.model.block();
  std::vector<double> c(order + 1, 0.0);
  for (int n = 0; n <= w.order(); ++n) c[n] = w.c[n];
  double a = w.variance;

  for (int j = 0; j < params.l; ++j) {
    const double s2 = params.model.layer_variance(j);
    const double diag = s2 * (1.0 - 1.0 / b);
    const double off = -s2 / b;
    std::vector<double> sk(order + 1, 0.0);
    for (int k = 1; k <= order; ++k) sk[k] = b * std::pow(diag, k) + b * (b - 1.0) * std::pow(off, k);
    const double ap = a - diag;
    if (!(ap > 0.0)) throw NumericError("Wick reference variance smaller than the block fluctuation");

    std::vector<double> next(2 * order + 1, 0.0);
    for (int n = 1; n <= order; ++n) next[n] += b * c[n];
    for (int mm = 1; mm <= order; ++mm) {
      if (c[mm] == 0.0) continue;
      for (int nn = 1; nn <= order; ++nn) {
        if (c[nn] == 0.0) continue;
        for (int k = 1; k <= std::min(mm, nn); ++k) {
          const double contraction = factorial(k) * binomial(mm, k) * binomial(nn, k) * sk[k];
          const int p = mm - k, q = nn - k;
          for (int s = 0; s <= std::min(p, q); ++s) {
            const int deg = p + q - 2 * s;
            next[deg] -= 0.5 * c[mm] * c[nn] * contraction * factorial(s) * binomial(p, s) *
                         binomial(q, s) * std::pow(ap, s);
          }
        }
      }
    }
    for (int n = 0; n <= order; ++n) c[n] = (n == 0) ? 0.0 : next[n];
    a = ap;
  }
  const double lam = params.field_scale();
  WickPolynomial out;
  out.c.assign(order + 1, 0.0);
  for (int n = 1; n <= order; ++n) {
    out.c[n] = c[n] * std::pow(lam, n);
    if (!std::isfinite(out.c[n])) throw NumericError("polynomial flow overflowed");
  }
  out.variance = a / (lam * lam);
  return out;
}

double gaussian_eigen_check(const RGParams& params, int n) {
  if (n < 2 || n % 2) throw ConfigError("gaussian_eigen_check needs even n >= 2");
  const double a = params.model.wick_variance();
  const SymmetricGrid grid = params.grid();
  auto ratio = [&](double h) {
    WickPolynomial w;
    w.variance = a;
    w.c.assign(std::max(n, 8) + 1, 0.0);
    w.c[n] = h;
    const BoltzmannFactor out = rg_step(w.to_grid(grid), params);
    return wick_projection(out, a, std::max(n, 8)).c[n] / h;
  };
  // The projection is O(h^2) off the linear response; Richardson removes it.
  const double h = 1e-8 / std::pow(a, n / 2.0);
  return 2.0 * ratio(h / 2.0) - ratio(h);
}

FixedPoint find_fixed_point_poly(const RGParams& params, int order) {
  const double a = params.model.wick_variance();
  const int nu = order / 2;  // unknowns c_2, c_4, ..., c_order
  auto pack = [&](const WickPolynomial& w) {
    Eigen::VectorXd v(nu);
    for (int i = 0; i < nu; ++i) v[i] = w.c[2 * (i + 1)];
    return v;
  };
  auto unpack = [&](const Eigen::VectorXd& v) {
    WickPolynomial w = quartic(0.0, 0.0, a, order);
    for (int i = 0; i < nu; ++i) w.c[2 * (i + 1)] = v[i];
    return w;
  };
  auto residual = [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(pack(rg_step_poly(unpack(v), params, order)) - v); };

  // Quartic seed from the one-coupling flow g' = lambda4 g - beta g^2.
  const double h = 1e-4;
  const double r1 = rg_step_poly(quartic(h, 0.0, a, order), params, order).g() / h;
  const double r2 = rg_step_poly(quartic(2 * h, 0.0, a, order), params, order).g() / (2 * h);
  const double beta = (r1 - r2) / h;
  const double lambda4 = 2.0 * r1 - r2;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(nu);
  if (beta > 0.0 && lambda4 > 1.0) v[1] = (lambda4 - 1.0) / beta;

  FixedPoint fp;
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd r = residual(v);
    const double res = r.lpNorm<Eigen::Infinity>();
    fp.residual_history.push_back(res);
    fp.iterations = it;
    if (res < 1e-14) break;
    Eigen::MatrixXd jac(nu, nu);
    for (int i = 0; i < nu; ++i) {
      const double dv = 1e-7 * std::max(1e-3, std::fabs(v[i]));
      Eigen::VectorXd vp = v, vm = v;
      vp[i] += dv;
      vm[i] -= dv;
      jac.col(i) = (residual(vp) - residual(vm)) / (2.0 * dv);
    }
    const Eigen::VectorXd step = jac.fullPivLu().solve(-r);
    v += step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-15) break;
  }
  fp.poly_seed = unpack(v);
  fp.projection = fp.poly_seed;
  fp.residual = residual(v).lpNorm<Eigen::Infinity>();
  if (!(fp.residual < 1e-9)) throw NumericError("polynomial fixed point did not converge");
  fp.f = fp.poly_seed.to_grid(params.grid());
  return fp;
}

FixedPoint find_fixed_point(const RGParams& params) {
  const FixedPoint seed = find_fixed_point_poly(params);
  FixedPoint fp = find_fixed_point(params, seed.f);
  fp.poly_seed = seed.poly_seed;
  return fp;
}

FixedPoint find_fixed_point(const RGParams& params, const BoltzmannFactor& init) {
  const int m = init.grid.center();
  BoltzmannFactor f = init;
  f.normalize();
  auto residual_of = [&](const BoltzmannFactor& in, const BoltzmannFactor& out) {
    Eigen::VectorXd r(m);
    for (int k = 1; k <= m; ++k) r[k - 1] = out.log_f[m + k] - in.log_f[m + k];
    return r;
  };
  FixedPoint fp;
  BoltzmannFactor image = rg_step(f, params);
  Eigen::VectorXd r = residual_of(f, image);
  double res = r.lpNorm<Eigen::Infinity>();
  fp.residual_history.push_back(res);
  for (int it = 0; it < 40 && res > 1e-11; ++it) {
    fp.iterations = it + 1;
    Eigen::MatrixXd jac = rg_jacobian(f, params);
    jac -= Eigen::MatrixXd::Identity(m, m);
    const Eigen::VectorXd step = jac.partialPivLu().solve(-r);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
      BoltzmannFactor trial = f;
      for (int k = 1; k <= m; ++k) {
        trial.log_f[m + k] += t * step[k - 1];
        trial.log_f[m - k] = trial.log_f[m + k];
      }
      try {
        BoltzmannFactor trial_image = rg_step(trial, params);
        Eigen::VectorXd tr = residual_of(trial, trial_image);
        const double tres = tr.lpNorm<Eigen::Infinity>();
        if (tres < res || ls == 11) {
          f = trial;
          image = trial_image;
          r = tr;
          accepted = tres < res;
          res = tres;
          break;
        }
      } catch (const NumericError&) {
      }
    }
    fp.residual_history.push_back(res);
    if (!accepted) break;
  }
  fp.f = f;
  fp.residual = res;
  fp.projection = wick_projection(f, params.model.wick_variance());
  if (!(res <= 1e-9)) throw NumericError("fixed point Newton iteration did not converge (residual " +
                                         std::to_string(res) + ")");
  return fp;
}

Spectrum linearize(const BoltzmannFactor& f, const RGParams& params) {
  const Eigen::MatrixXd jac = rg_jacobian(f, params);
  Eigen::EigenSolver<Eigen::MatrixXd> es(jac);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
  const Eigen::VectorXcd vals = es.eigenvalues();
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  std::vector<int> order(vals.size());
  for (int i = 0; i < static_cast<int>(order.size()); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return std::abs(vals[x]) > std::abs(vals[y]); });
  Spectrum s;
  s.vectors.resize(vecs.rows(), vecs.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    s.values.push_back(vals[order[i]]);
    s.vectors.col(i) = vecs.col(order[i]).normalized();
  }
  const int lead = std::min<int>(6, static_cast<int>(order.size()));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.vectors.leftCols(lead));
  const auto sv = svd.singularValues();
  s.condition = sv[0] / sv[lead - 1];
  if (s.condition > 1e8)
    s.warnings.push_back("leading eigenvectors nearly parallel, condition " + std::to_string(s.condition));
  for (int i = 0; i < lead; ++i)
    if (std::fabs(s.values[i].imag()) > 1e-8 * std::abs(s.values[i]))
      s.warnings.push_back("complex leading eigenvalue at position " + std::to_string(i));
  return s;
}

double dimension_from_eigenvalue(double lambda, const RGParams& params) {
  if (!(lambda > 0.0)) throw DomainError("eigenvalue must be positive");
  return params.model.d - std::log(lambda) / (params.l * std::log(static_cast<double>(params.model.p)));
}

ExponentReport anomalous_dimension(const RGParams& params) {
  const FixedPoint fp = find_fixed_point(params);
  const Spectrum s = linearize(fp.f, params);
  ExponentReport r;
  r.eps = params.model.eps;
  r.dim_phi = params.dim_phi();
  r.lambda2 = s.values.front().real();
  r.dim_phi2 = dimension_from_eigenvalue(r.lambda2, params);
  r.eta2 = r.dim_phi2 - 2.0 * r.dim_phi;
  r.ratio = r.eps > 0.0 ? r.eta2 / (r.eps / 3.0) : std::numeric_limits<double>::quiet_NaN();
  r.g_star = fp.projection.g();
  r.mu_star = fp.projection.mu();
  r.residual = fp.residual;
  for (const auto& v : s.values)
    if (std::abs(v) > 1.0 + 1e-9) ++r.relevant_count;
  for (int i = 0; i < std::min<int>(6, static_cast<int>(s.values.size())); ++i) r.leading.push_back(s.values[i]);
  return r;
}

std::vector<FlowPoint> flow(const BoltzmannFactor& f0, const RGParams& params, int steps) {
  const double a = params.model.wick_variance();
  std::vector<FlowPoint> out;
  BoltzmannFactor f = f0;
  f.normalize();
  auto record = [&](int step, double residual, bool healthy) {
    const WickPolynomial w = wick_projection(f, a, 4);
    out.push_back({step, w.mu(), w.g(), residual, healthy});
  };
  record(0, 0.0, true);
  for (int s = 1; s <= steps; ++s) {
    BoltzmannFactor next;
    try {
      next = rg_step(f, params);
    } catch (const NumericError&) {
      out.back().healthy = false;
      break;
    }
    double res = 0.0;
    for (int i = 0; i < f.grid.size(); ++i) res = std::max(res, std::fabs(next.log_f[i] - f.log_f[i]));
    f = next;
    record(s, res, true);
  }
  return out;
}

int classify_trajectory(const BoltzmannFactor& f0, const RGParams& params, int horizon) {
  const double a = params.model.wick_variance();
  BoltzmannFactor f = f0;
  f.normalize();
  double prev = wick_projection(f, a, 2).mu();
  double increment = 0.0;
  for (int s = 0; s < horizon; ++s) {
    try {
      f = rg_step(f, params);
    } catch (const NumericError&) {
      return -1;
    }
    const double c2 = wick_projection(f, a, 2).mu();
    if (!std::isfinite(c2)) return -1;
    if (c2 > 1.0) return 1;
    if (c2 < -1.0) return -1;
    increment = c2 - prev;
    prev = c2;
  }
  return increment > 0.0 ? 1 : -1;
}

TuneResult tune_critical_mu(double g, const RGParams& params, const TuneOptions& opt) {
  const double a = params.model.wick_variance();
  const SymmetricGrid grid = params.grid();
  auto factor = [&](double mu) {
    if (opt.base) {
      BoltzmannFactor f = *opt.base;
      for (int i = 0; i < f.grid.size(); ++i)
        f.log_f[i] -= (mu - opt.base_mu) * wick_monomial(2, a, f.grid.node(i));
      f.normalize();
      return f;
    }
    return quartic(g, mu, a).to_grid(grid);
  };
  double lo = opt.mu_lo, hi = opt.mu_hi;
  const int s_lo = classify_trajectory(factor(lo), params, opt.horizon);
  const int s_hi = classify_trajectory(factor(hi), params, opt.horizon);
  if (s_lo == s_hi) throw DomainError("tuning bracket does not straddle the critical point");
  const bool massive_high = s_hi > 0;
  TuneResult r;
  while (hi - lo > opt.tolerance && r.bisections < 200) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const int s = classify_trajectory(factor(mid), params, opt.horizon);
    if ((s > 0) == massive_high) hi = mid; else lo = mid;
    ++r.bisections;
  }
  r.mu_c = 0.5 * (lo + hi);
  r.width = hi - lo;
  return r;
}

}  // namespace hrg

#include "hrg/block_integral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "hrg/error.hpp"

namespace hrg {

namespace {

using cplx = std::complex<double>;

cplx ipow(cplx z, int n) {
  cplx r(1.0, 0.0);
  while (n > 0) {
    if (n & 1) r *= z;
    z *= z;
    n >>= 1;
  }
  return r;
}

// sum_k rho[k] * extra[k] * exp(i t_j xi_k) for t_j = j * dt.
void fourier(const std::vector<double>& xi, const std::vector<double>& rho, const double* extra,
             double dt, std::vector<cplx>& out) {
  const int nt = static_cast<int>(out.size());
  std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const double r = extra ? rho[k] * extra[k] : rho[k];
    if (r == 0.0) continue;
    const cplx step = std::polar(1.0, dt * xi[k]);
    cplx z(r, 0.0);
    for (int j = 0; j < nt; ++j) {
      out[j] += z;
      z *= step;
    }
  }
}

}  // namespace

struct ZeroSumBlock::Tilt {
  std::vector<double> xi;
  double dx = 0.0;
  double kappa = 0.0;
  double v = 0.0;  // mean tilted variance per child
  std::vector<std::vector<double>> rho;  // normalized tilted weights per factor
  std::vector<double> log_z;
};

ZeroSumBlock::ZeroSumBlock(int b, double sigma, BlockOptions opt) : b_(b), sigma_(sigma), opt_(opt) {
  if (b < 2) throw ConfigError("block needs at least two children");
  if (!(sigma > 0.0)) throw ConfigError("block variance must be positive");
  if (opt_.n_xi < 16 || opt_.n_t < 8) throw ConfigError("block quadrature too coarse");
}

ZeroSumBlock::Tilt ZeroSumBlock::prepare(double a, const std::vector<BlockFactor>& factors) const {
  int total = 0;
  for (const auto& f : factors) total += f.multiplicity;
  if (total != b_) throw ConfigError("factor multiplicities must add up to the block size");

  const int nf = static_cast<int>(factors.size());
  Tilt t;
  std::vector<std::vector<double>> lv(nf, std::vector<double>(opt_.n_xi));
  std::vector<double> base(opt_.n_xi);

  auto fill = [&](double half_width) {
    t.xi.resize(opt_.n_xi);
    t.dx = 2.0 * half_width / (opt_.n_xi - 1);
    for (int k = 0; k < opt_.n_xi; ++k) {
      t.xi[k] = -half_width + k * t.dx;
      base[k] = -t.xi[k] * t.xi[k] / (2.0 * sigma_ * sigma_);
    }
    for (int c = 0; c < nf; ++c)
      for (int k = 0; k < opt_.n_xi; ++k) {
        const double v = factors[c].log_value(a + t.xi[k]);
        if (std::isnan(v)) throw NumericError("log factor is NaN");
        lv[c][k] = v;
      }
  };

  // Newton on the convex function sum_c m_c log int exp(lv_c + kappa xi) dgamma;
  // its derivative is the total tilted mean.
  auto solve = [&]() {
    double lo = -HUGE_VAL, hi = HUGE_VAL;
    for (int iter = 0; iter < 200; ++iter) {
      double mean = 0.0, var = 0.0;
      for (int c = 0; c < nf; ++c) {
        double mx = -HUGE_VAL;
        for (int k = 0; k < opt_.n_xi; ++k) mx = std::max(mx, lv[c][k] + base[k] + t.kappa * t.xi[k]);
        if (!std::isfinite(mx)) throw NumericError("block factor vanishes on the integration range");
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (int k = 0; k < opt_.n_xi; ++k) {
          const double w = std::exp(lv[c][k] + base[k] + t.kappa * t.xi[k] - mx);
          s0 += w;
          s1 += w * t.xi[k];
          s2 += w * t.xi[k] * t.xi[k];
        }
        const double m1 = s1 / s0;
        mean += factors[c].multiplicity * m1;
        var += factors[c].multiplicity * std::max(s2 / s0 - m1 * m1, 0.0);
      }
      t.v = var / b_;
      if (std::fabs(mean) <= 1e-10 * std::sqrt(var) * b_ || var <= 0.0) return;
      if (mean > 0.0) hi = std::min(hi, t.kappa); else lo = std::max(lo, t.kappa);
      double next = t.kappa - mean / var;
      if (!(next > lo && next < hi)) {
        if (std::isfinite(lo) && std::isfinite(hi)) next = 0.5 * (lo + hi);
        else next = t.kappa - std::copysign(4.0 / sigma_, mean) * (1 + iter);
      }
      t.kappa = next;
    }
    throw NumericError("tilt parameter did not converge");
  };

  double half = opt_.xi_sigmas * sigma_;
  fill(half);
  solve();
  const double refined = opt_.xi_widths * std::sqrt(t.v);
  if (refined < 0.8 * half) {
    fill(refined);
    solve();
  }

  t.rho.assign(nf, std::vector<double>(opt_.n_xi));
  t.log_z.assign(nf, 0.0);
  const double log_norm = std::log(t.dx / std::sqrt(2.0 * std::numbers::pi * sigma_ * sigma_));
  for (int c = 0; c < nf; ++c) {
    double mx = -HUGE_VAL;
    for (int k = 0; k < opt_.n_xi; ++k) mx = std::max(mx, lv[c][k] + base[k] + t.kappa * t.xi[k]);
    double s0 = 0.0;
    for (int k = 0; k < opt_.n_xi; ++k) {
      t.rho[c][k] = std::exp(lv[c][k] + base[k] + t.kappa * t.xi[k] - mx);
      s0 += t.rho[c][k];
    }
    for (auto& r : t.rho[c]) r /= s0;
    t.log_z[c] = mx + std::log(s0) + log_norm;
  }
  return t;
}

BlockResult ZeroSumBlock::evaluate(double a, const std::vector<BlockFactor>& factors,
                                   const std::vector<BlockMark>& marks) const {
  const Tilt t = prepare(a, factors);
  const int nf = static_cast<int>(factors.size());
  const double t_max = std::sqrt(opt_.t_decay / (b_ * t.v));
  const double dt = t_max / (opt_.n_t - 1);

  std::vector<std::vector<cplx>> h(nf, std::vector<cplx>(opt_.n_t));
  for (int c = 0; c < nf; ++c) fourier(t.xi, t.rho[c], nullptr, dt, h[c]);

  std::vector<int> marked(nf, 0);
  std::vector<std::vector<cplx>> hm(marks.size(), std::vector<cplx>(opt_.n_t));
  std::vector<double> extra(t.xi.size());
  for (std::size_t m = 0; m < marks.size(); ++m) {
    const int c = marks[m].factor;
    if (c < 0 || c >= nf || ++marked[c] > factors[c].multiplicity)
      throw ConfigError("block mark refers to a missing child");
    for (std::size_t k = 0; k < t.xi.size(); ++k) extra[k] = marks[m].ratio(a + t.xi[k]);
    fourier(t.xi, t.rho[c], extra.data(), dt, hm[m]);
  }

  double plain = 0.0, with_marks = 0.0;
  for (int j = 0; j < opt_.n_t; ++j) {
    const double w = (j == 0 || j == opt_.n_t - 1) ? 0.5 * dt : dt;
    cplx p(1.0, 0.0), q(1.0, 0.0);
    for (int c = 0; c < nf; ++c) {
      p *= ipow(h[c][j], factors[c].multiplicity);
      if (!marks.empty()) q *= ipow(h[c][j], factors[c].multiplicity - marked[c]);
    }
    for (const auto& col : hm) q *= col[j];
    plain += w * p.real();
    with_marks += w * q.real();
  }
  const double pref = 2.0 * std::sqrt(b_ * sigma_ * sigma_ / (2.0 * std::numbers::pi));
  const double integral = pref * plain;
  if (!(integral > 0.0) || !std::isfinite(integral))
    throw NumericError("constraint integral is not positive");

  BlockResult r;
  r.log_value = std::log(integral);
  for (int c = 0; c < nf; ++c) r.log_value += factors[c].multiplicity * t.log_z[c];
  if (!marks.empty()) r.ratio = with_marks / plain;
  return r;
}

double ZeroSumBlock::evaluate_with_gradient(double a, const SymmetricGrid& grid,
                                            const std::vector<double>& values,
                                            std::vector<double>* grad) const {
  const std::vector<BlockFactor> factors{
      {[&](double x) { return grid.interpolate(values, x); }, b_}};
  const Tilt t = prepare(a, factors);
  const double t_max = std::sqrt(opt_.t_decay / (b_ * t.v));
  const double dt = t_max / (opt_.n_t - 1);

  std::vector<cplx> h(opt_.n_t), hb1(opt_.n_t);
  fourier(t.xi, t.rho[0], nullptr, dt, h);
  double plain = 0.0;
  for (int j = 0; j < opt_.n_t; ++j) {
    const double w = (j == 0 || j == opt_.n_t - 1) ? 0.5 * dt : dt;
    hb1[j] = w * ipow(h[j], b_ - 1);
    plain += (hb1[j] * h[j]).real();
  }
  const double pref = 2.0 * std::sqrt(b_ * sigma_ * sigma_ / (2.0 * std::numbers::pi));
  const double integral = pref * plain;
  if (!(integral > 0.0) || !std::isfinite(integral))
    throw NumericError("constraint integral is not positive");

  if (grad) {
    // d log R / d l_j = b sum_k rho_k s_j(a + xi_k) A(xi_k) / I,
    // A(xi) = int dt exp(i t xi) H(t)^(b-1) over the whole line.
    for (std::size_t k = 0; k < t.xi.size(); ++k) {
      if (t.rho[0][k] < 1e-300) continue;
      const cplx step = std::polar(1.0, dt * t.xi[k]);
      cplx z(1.0, 0.0);
      double acc = 0.0;
      for (int j = 0; j < opt_.n_t; ++j) {
        acc += (hb1[j] * z).real();
        z *= step;
      }
      const double coeff = b_ * t.rho[0][k] * acc / plain;
      const Stencil s = grid.stencil(a + t.xi[k]);
      for (int q = 0; q < s.n; ++q) (*grad)[s.idx[q]] += coeff * s.w[q];
    }
  }
  return std::log(integral) + b_ * t.log_z[0];
}

std::vector<double> ZeroSumBlock::draw(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, sigma_);
  std::vector<double> z(b_);
  double mean = 0.0;
  for (auto& v : z) {
    v = normal(rng);
    mean += v;
  }
  mean /= b_;
  for (auto& v : z) v -= mean;
  return z;
}

McEstimate ZeroSumBlock::monte_carlo(double a, const std::vector<BlockFactor>& factors,
                                     const std::vector<std::vector<double>>& draws) const {
  if (draws.size() < 2) throw ConfigError("Monte Carlo needs at least two draws");
  double s1 = 0.0, s2 = 0.0;
  for (const auto& z : draws) {
    double lp = 0.0;
    int i = 0;
    for (const auto& f : factors)
      for (int m = 0; m < f.multiplicity; ++m, ++i) lp += f.log_value(a + z[i]);
    const double v = std::exp(lp);
    s1 += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(draws.size());
  McEstimate e;
  e.mean = s1 / n;
  e.std_error = std::sqrt(std::max(s2 / n - e.mean * e.mean, 0.0) / (n - 1));
  return e;
}

}  // namespace hrg

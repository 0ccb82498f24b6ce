#include <doctest.h>

#include <cmath>
#include <random>

#include "hrg/block_integral.hpp"
#include "hrg/error.hpp"
#include "hrg/rg_flow.hpp"
#include "oracles.hpp"

using namespace hrg;

namespace {

RGParams params_of(int p, int d, double eps, int l = 1) {
  RGParams r;
  r.model = ModelParams{p, d, eps};
  r.l = l;
  return r;
}

double quartic_log(double g, double mu, double x) { return -g * x * x * x * x - mu * x * x; }

}  // namespace

TEST_CASE("zero-sum block against tensor Gauss-Hermite") {
  for (int b : {2, 4}) {
    const double sigma = 0.8;
    ZeroSumBlock block(b, sigma);
    auto f = [](double x) { return quartic_log(0.05, -0.1, x); };
    auto h = [](double x) { return quartic_log(0.02, 0.3, x) + 0.1 * x; };
    for (double a : {0.0, 0.7, -1.9}) {
      const std::vector<BlockFactor> factors{{f, b - 1}, {h, 1}};
      const double oracle = oracle::zero_sum_expect(
          b, sigma,
          [&](const std::vector<double>& z) {
            double s = h(a + z[b - 1]);
            for (int i = 0; i < b - 1; ++i) s += f(a + z[i]);
            return std::exp(s);
          },
          b == 2 ? 80 : 40);
      const BlockResult r = block.evaluate(a, factors);
      CHECK(r.log_value == doctest::Approx(std::log(oracle)).epsilon(1e-10));

      // A mark multiplies one copy of f by the field value at that child.
      const BlockResult marked = block.evaluate(a, factors, {BlockMark{0, [](double x) { return x; }}});
      const double marked_oracle = oracle::zero_sum_expect(
          b, sigma,
          [&](const std::vector<double>& z) {
            double s = h(a + z[b - 1]);
            for (int i = 0; i < b - 1; ++i) s += f(a + z[i]);
            return (a + z[0]) * std::exp(s);
          },
          b == 2 ? 80 : 40);
      CHECK(marked.ratio == doctest::Approx(marked_oracle / oracle).epsilon(1e-9));
    }
  }
}

TEST_CASE("zero-sum block Monte Carlo agrees within three standard errors") {
  ZeroSumBlock block(8, 1.0);
  std::mt19937_64 rng(12);
  std::vector<std::vector<double>> draws(40000);
  for (auto& z : draws) {
    z = block.draw(rng);
    double s = 0.0;
    for (double v : z) s += v;
    CHECK(std::fabs(s) < 1e-13);
  }
  const std::vector<BlockFactor> factors{{[](double x) { return quartic_log(0.01, 0.02, x); }, 8}};
  for (double a : {0.0, 1.0, 2.5}) {
    const McEstimate mc = block.monte_carlo(a, factors, draws);
    CHECK(std::fabs(mc.mean - std::exp(block.evaluate(a, factors).log_value)) < 3.0 * mc.std_error);
  }
}

TEST_CASE("the normalized step fixes F = 1 and preserves evenness") {
  const RGParams p = params_of(2, 3, 0.1);
  const BoltzmannFactor one = BoltzmannFactor::constant(p.grid());
  const BoltzmannFactor out = rg_step(one, p);
  for (double v : out.log_f) CHECK(v == 0.0);
  const BoltzmannFactor f = quartic(0.01, 0.005, p.model.wick_variance()).to_grid(p.grid());
  CHECK(rg_step(f, p).max_asymmetry() < 1e-12);
}

TEST_CASE("Fourier backend against an independent tensor quadrature") {
  // p = 2, d = 2: four children, three-dimensional Gauss-Hermite. Cubic
  // interpolation error is O(h^4): 1.4e-7 at the default 513 nodes, so the
  // grid is pinned finer here.
  RGParams p = params_of(2, 2, 0.1);
  p.grid_n = 2049;
  const WickPolynomial w = quartic(0.02, 0.01, p.model.wick_variance());
  const BoltzmannFactor f = w.to_grid(p.grid());
  auto log_f = [&](double x) { return -w.potential(x) + w.potential(0.0); };
  const std::vector<double> logs = rg_block_log_expectation(f, p);
  const double r = p.field_scale();
  const int m = f.grid.center();
  for (int k : {0, 7, 40, 90}) {
    const double psi = f.grid.node(m + k);
    const double oracle = oracle::zero_sum_expect(
        4, 1.0,
        [&](const std::vector<double>& z) {
          double s = 0.0;
          for (double zi : z) s += log_f(r * psi + zi);
          return std::exp(s);
        },
        40);
    CHECK(logs[k] == doctest::Approx(std::log(oracle)).epsilon(1e-8));
  }
}

TEST_CASE("Fourier and Monte Carlo backends agree") {
  RGParams p = params_of(2, 3, 0.1);
  p.mc_samples = 20000;
  const BoltzmannFactor f = quartic(0.01, 0.005, p.model.wick_variance()).to_grid(p.grid());
  const std::vector<double> logs = rg_block_log_expectation(f, p);
  // One draw set is shared by all nodes, so a single seed gives a smooth,
  // strongly correlated error curve. Count 3-sigma misses over several seeds.
  int bad = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    p.mc_seed = seed;
    const std::vector<McEstimate> mc = rg_block_monte_carlo(f, p);
    for (std::size_t k = 0; k < mc.size(); k += 8, ++total)
      if (std::fabs(mc[k].mean - std::exp(logs[k])) > 3.0 * mc[k].std_error) ++bad;
  }
  CHECK(bad <= total / 20);
}

TEST_CASE("Gaussian eigenvalues") {
  for (double eps : {0.0, 0.1}) {
    const RGParams p = params_of(2, 3, eps);
    const double phi = p.dim_phi();
    CHECK(gaussian_eigen_check(p, 2) == doctest::Approx(std::pow(2.0, 3 - 2 * phi)).epsilon(1e-6));
    CHECK(gaussian_eigen_check(p, 4) == doctest::Approx(std::pow(2.0, 3 - 4 * phi)).epsilon(1e-6));
    for (int n : {2, 4, 6})
      CHECK(std::fabs(dimension_from_eigenvalue(gaussian_eigen_check(p, n), p) - n * phi) < 1e-4);
  }
  const RGParams p = params_of(2, 3, 0.1);
  CHECK(gaussian_eigen_check(p, 4) == doctest::Approx(std::pow(2.0, 0.1)).epsilon(1e-6));
  CHECK(dimension_from_eigenvalue(1.0, p) == doctest::Approx(3.0));
  CHECK(dimension_from_eigenvalue(std::pow(2.0, 3 - 2 * p.dim_phi()), p) == doctest::Approx(2 * p.dim_phi()));
  CHECK_THROWS_AS(gaussian_eigen_check(p, 3), ConfigError);
}

TEST_CASE("mass perturbation grows linearly with the relevant multiplier") {
  const RGParams p = params_of(2, 3, 0.1);
  const double a = p.model.wick_variance(), lambda = std::pow(2.0, 3 - 2 * p.dim_phi());
  auto resp = [&](double mu) {
    return wick_projection(rg_step(quartic(0.0, mu, a).to_grid(p.grid()), p), a).mu() / mu;
  };
  const double r1 = resp(1e-4), r2 = resp(2e-4);
  CHECK(std::fabs(r1 - lambda) < 1e-3 * lambda);
  // The deviation is O(mu): halving mu halves it.
  CHECK(std::fabs(2 * r1 - r2 - lambda) < 0.1 * std::fabs(r1 - lambda) + 1e-9);
}

TEST_CASE("polynomial flow") {
  const RGParams p = params_of(2, 3, 0.1);
  const double a = p.model.wick_variance();
  const WickPolynomial zero = rg_step_poly(quartic(0.0, 0.0, a), p);
  for (double c : zero.c) CHECK(c == 0.0);
  const double lambda = std::pow(2.0, 3 - 2 * p.dim_phi());
  CHECK(rg_step_poly(quartic(0.0, 1e-7, a), p).mu() / 1e-7 == doctest::Approx(lambda).epsilon(1e-6));
  // The polynomial step keeps second-order cumulants, so it differs from the
  // grid step at third order in the couplings.
  auto gap = [&](double h) {
    const WickPolynomial w = quartic(h, 0.5 * h, a);
    const WickPolynomial grid = wick_projection(rg_step(w.to_grid(p.grid()), p), a);
    const WickPolynomial poly = rg_step_poly(w, p);
    return std::fabs(grid.g() - poly.g()) + std::fabs(grid.mu() - poly.mu());
  };
  const double g1 = gap(1e-3), g2 = gap(5e-4);
  CHECK(g1 < 5e-5);
  CHECK(g1 / g2 > 6.0);
}

TEST_CASE("semigroup: two steps with L = p equal one step with L = p^2") {
  const RGParams p1 = params_of(2, 1, 0.2, 1), p2 = params_of(2, 1, 0.2, 2);
  const BoltzmannFactor f = quartic(0.03, 0.01, p1.model.wick_variance()).to_grid(p1.grid());
  const BoltzmannFactor twice = rg_step(rg_step(f, p1), p1), once = rg_step(f, p2);
  double diff = 0.0;
  for (int i = 0; i < f.grid.size(); ++i)
    if (std::fabs(f.grid.node(i)) <= 6.0) diff = std::max(diff, std::fabs(twice.log_f[i] - once.log_f[i]));
  CHECK(diff < 1e-6);
}

TEST_CASE("fixed points") {
  const FixedPoint gauss = find_fixed_point(params_of(2, 3, 0.0));
  CHECK(std::fabs(gauss.projection.g()) < 1e-9);
  CHECK(gauss.residual < 1e-9);

  std::vector<double> gs;
  for (double eps : {0.05, 0.1, 0.2}) {
    const RGParams p = params_of(2, 3, eps);
    const FixedPoint fp = find_fixed_point(p);
    CHECK(fp.residual <= 1e-9);
    CHECK(fp.projection.g() > 0.0);
    CHECK(fp.f.max_asymmetry() < 1e-12);
    for (int i = 0; i < fp.f.grid.size(); ++i)
      if (std::fabs(fp.f.grid.node(i)) > 3.0) CHECK(fp.f.log_f[i] <= 0.0);
    gs.push_back(fp.projection.g() / eps);
  }
  // g* is O(eps): g*/eps changes little across the range.
  CHECK(std::fabs(gs[0] / gs[2] - 1.0) < 0.3);
}

TEST_CASE("spectra") {
  const RGParams p = params_of(2, 3, 0.1);
  const Spectrum s0 = linearize(BoltzmannFactor::constant(p.grid()), p);
  auto has = [&](const Spectrum& s, double v) {
    for (const auto& z : s.values)
      if (std::fabs(z.real() - v) < 1e-4 * v && std::fabs(z.imag()) < 1e-9) return true;
    return false;
  };
  CHECK(has(s0, std::pow(2.0, 3 - 2 * p.dim_phi())));
  CHECK(has(s0, std::pow(2.0, 3 - 4 * p.dim_phi())));
  CHECK(has(s0, std::pow(2.0, 3 - 6 * p.dim_phi())));

  const FixedPoint fp = find_fixed_point(p);
  const Spectrum s = linearize(fp.f, p);
  int relevant = 0;
  for (const auto& z : s.values)
    if (std::abs(z) > 1.0 + 1e-9) ++relevant;
  CHECK(relevant == 1);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(s.values[i].imag()) < 1e-9);
}

TEST_CASE("critical tuning") {
  const RGParams p = params_of(2, 3, 0.1);
  TuneOptions opt;
  opt.horizon = 40;
  opt.tolerance = 1e-9;
  CHECK(std::fabs(tune_critical_mu(0.0, p, opt).mu_c) < 1e-8);
  // The classifier is monotone along the mass line.
  const double g = 0.0025, a = p.model.wick_variance();
  int prev = -1;
  for (double mu = -0.01; mu <= 0.01; mu += 0.0025) {
    const int c = classify_trajectory(quartic(g, mu, a).to_grid(p.grid()), p, 40);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("anomalous dimension vanishes for the Gaussian model") {
  const ExponentReport r = anomalous_dimension(params_of(2, 3, 0.0));
  CHECK(std::fabs(r.eta2) < 1e-9);
  CHECK(std::isnan(r.ratio));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params_of(2, 3, 3.0).validate(), ConfigError);
  RGParams p = params_of(2, 3, 0.1);
  p.grid_n = 100;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

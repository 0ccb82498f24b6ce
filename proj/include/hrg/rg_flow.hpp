#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hrg/block_integral.hpp"
#include "hrg/grid.hpp"
#include "hrg/model.hpp"

namespace hrg {

enum class Backend { kFourier, kMonteCarlo };

struct RGParams {
  ModelParams model;
  int l = 1;              // L = p^l
  int grid_n = 513;
  double phi_max = 12.0;
  BlockOptions block;
  Backend backend = Backend::kFourier;
  int mc_samples = 20000;
  std::uint64_t mc_seed = 1;

  double dim_phi() const { return model.dim_phi(); }
  // L^(-[phi]), the field rescaling of one step.
  double field_scale() const;
  SymmetricGrid grid() const { return SymmetricGrid(grid_n, phi_max); }
  void validate() const;
};

// Sampled log of a single-site Boltzmann factor, gauge log F(0) = 0.
struct BoltzmannFactor {
  SymmetricGrid grid;
  std::vector<double> log_f;

  static BoltzmannFactor constant(const SymmetricGrid& g);
  template <class Fn>
  static BoltzmannFactor from_function(const SymmetricGrid& g, Fn fn) {
    BoltzmannFactor f{g, std::vector<double>(g.size())};
    for (int i = 0; i < g.size(); ++i) f.log_f[i] = fn(g.node(i));
    f.normalize();
    return f;
  }

  double operator()(double x) const { return grid.interpolate(log_f, x); }
  void normalize();  // subtract log F(0)
  double max_asymmetry() const;
};

// :x^n: with respect to variance a, i.e. a^(n/2) He_n(x / sqrt(a)).
double wick_monomial(int n, double a, double x);

// Potential V = sum_n c[n] :phi^n:_variance, F = exp(-V). Only even n are used.
struct WickPolynomial {
  double variance = 1.0;
  std::vector<double> c;  // c[n], n = 0..order

  int order() const { return static_cast<int>(c.size()) - 1; }
  double mu() const { return c.size() > 2 ? c[2] : 0.0; }
  double g() const { return c.size() > 4 ? c[4] : 0.0; }
  double potential(double x) const;
  BoltzmannFactor to_grid(const SymmetricGrid& grid) const;
};

WickPolynomial quartic(double g, double mu, double variance, int order = 8);

// Coefficients of -log F in the Wick basis with respect to `variance`.
WickPolynomial wick_projection(const BoltzmannFactor& f, double variance, int order = 8);

BoltzmannFactor rg_step(const BoltzmannFactor& f, const RGParams& params);

// log E[prod_i F(L^-[phi] psi + zeta_i)] before normalization, on psi >= 0
// nodes (index 0 is psi = 0). Single-layer maps only.
std::vector<double> rg_block_log_expectation(const BoltzmannFactor& f, const RGParams& params);
// The same expectation by Monte Carlo with common random numbers.
std::vector<McEstimate> rg_block_monte_carlo(const BoltzmannFactor& f, const RGParams& params);

// Jacobian of the normalized step with respect to log F at the psi > 0 nodes
// (the psi = 0 value is fixed by the gauge; psi < 0 follows by evenness).
Eigen::MatrixXd rg_jacobian(const BoltzmannFactor& f, const RGParams& params);

// Second-order cumulant expansion of the same map on Wick coefficients.
WickPolynomial rg_step_poly(const WickPolynomial& w, const RGParams& params, int order = 8);

double gaussian_eigen_check(const RGParams& params, int n);

struct FixedPoint {
  BoltzmannFactor f;
  WickPolynomial projection;
  WickPolynomial poly_seed;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
};

FixedPoint find_fixed_point_poly(const RGParams& params, int order = 8);
FixedPoint find_fixed_point(const RGParams& params);
FixedPoint find_fixed_point(const RGParams& params, const BoltzmannFactor& init);

struct Spectrum {
  std::vector<std::complex<double>> values;  // sorted by decreasing modulus
  Eigen::MatrixXcd vectors;                  // columns match values
  double condition = 0.0;
  std::vector<std::string> warnings;
};

Spectrum linearize(const BoltzmannFactor& f, const RGParams& params);

double dimension_from_eigenvalue(double lambda, const RGParams& params);

struct ExponentReport {
  double eps = 0.0;
  double dim_phi = 0.0;
  double lambda2 = 0.0;
  double dim_phi2 = 0.0;
  double eta2 = 0.0;
  double ratio = 0.0;  // eta2 / (eps/3); NaN at eps = 0
  double g_star = 0.0;
  double mu_star = 0.0;
  double residual = 0.0;
  int relevant_count = 0;
  std::vector<std::complex<double>> leading;
};

ExponentReport anomalous_dimension(const RGParams& params);

// Flow diagnostics for one step.
struct FlowPoint {
  int step = 0;
  double c2 = 0.0;
  double c4 = 0.0;
  double residual = 0.0;  // max |log F_{n} - log F_{n-1}|
  bool healthy = true;
};

std::vector<FlowPoint> flow(const BoltzmannFactor& f0, const RGParams& params, int steps);

struct TuneOptions {
  int horizon = 60;
  double tolerance = 1e-12;
  double mu_lo = -1.0;
  double mu_hi = 1.0;
  // When set, the tuning line is base * exp(-(mu - base_mu) :phi^2:) instead
  // of the bare exp(-g :phi^4: - mu :phi^2:).
  const BoltzmannFactor* base = nullptr;
  double base_mu = 0.0;
};

// +1 massive, -1 unstable.
int classify_trajectory(const BoltzmannFactor& f0, const RGParams& params, int horizon);

struct TuneResult {
  double mu_c = 0.0;
  double width = 0.0;
  int bisections = 0;
};

TuneResult tune_critical_mu(double g, const RGParams& params, const TuneOptions& opt = {});

}  // namespace hrg

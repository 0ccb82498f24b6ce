#pragma once

#include <climits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hrg/mobius.hpp"
#include "hrg/model.hpp"
#include "hrg/tree.hpp"

namespace hrg {

struct CovarianceSpec {
  ModelParams model;
  std::optional<int> r_uv;  // nullopt: no UV cutoff
  int l = 1;                // L = p^l

  double dim_phi() const { return model.dim_phi(); }
  void validate() const;
};

// Covariance of vertex variables zeta_u, zeta_v of a window.
double vertex_covariance(const Window& w, const BallAddress& u, const BallAddress& v, const CovarianceSpec& spec);

// Covariance contributed by layers [lo, hi) to two points whose balls split
// at `join` (|x - y| = p^join); join = INT_MIN for x = y. hi = INT_MAX means
// no upper limit.
double layer_band_covariance(const ModelParams& m, int join, int lo, int hi = INT_MAX);

double covariance_exact(const PAdicPoint& x, const PAdicPoint& y, const CovarianceSpec& spec);

// Covariance of the uncut field under a conformal map f:
//   |J_f(x)|^([phi]/d) |J_f(y)|^([phi]/d) C(f x, f y) = C(x, y).
// Both sides are c0 times a power of p; the exponents are reported in units of
// [phi]/d so the comparison is between integers.
struct MobiusCovariance {
  int lhs_exponent = 0;
  int rhs_exponent = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool exact() const { return lhs_exponent == rhs_exponent; }
};

MobiusCovariance mobius_covariance(const MobiusWord& f, const PAdicPoint& x, const PAdicPoint& y,
                                   const ModelParams& m);

// Radial kernel K(k) at distance p^k: plateau for k <= cutoff, else
// amp * p^(-alpha k).
struct RadialKernel {
  int p = 2;
  int d = 3;
  double amp = 1.0;
  double alpha = 1.5;
  std::optional<int> cutoff;
  double plateau = 0.0;

  static RadialKernel covariance(const CovarianceSpec& spec);
  // Kernel of C^2, used for Wick-square variances.
  static RadialKernel squared(const CovarianceSpec& spec);

  double operator()(int k) const;
  // int_B int_B K(|x - y|) dx dy over a ball of radius p^k.
  double self_integral(int k) const;
  // int_A int_B K for two balls of a window.
  double pair_integral(const Window& w, const BallAddress& a, const BallAddress& b) const;
};

double smeared(const Window& w, const BallFunction& f, const BallFunction& g, const RadialKernel& k);
double covariance_smeared(const Window& w, const BallFunction& f, const BallFunction& g, const CovarianceSpec& spec);

// Fluctuation field of one window: zeta[k][i] for layer k in [0, S) with i the
// dense ball index, plus the field contributed by all layers >= S.
struct FieldConfig {
  int p = 2, d = 3, S = 1;
  std::vector<std::vector<double>> zeta;
  double root_field = 0.0;
  std::uint64_t seed = 0;

  std::vector<double> leaf_field() const;
  // "layer,path,zeta" rows; the root field is reported at layer S.
  void write_csv(std::ostream& os, const Window& w) const;
};

// Independent draw from the Gaussian window measure. Layers below a positive
// UV cutoff are left at zero.
FieldConfig sample_field(const Window& w, const CovarianceSpec& spec, std::mt19937_64& rng);

struct PsdReport {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd eigenvalues;  // ascending
  double min_eigenvalue = 0.0;
  double norm = 0.0;            // spectral norm
  bool psd = false;             // min_eigenvalue >= -1e-10 * norm
};

PsdReport psd_report(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

// Gram matrices of Gamma = C_0 - C_1 (layers [0, l)) and of C_0, C_1 on the
// window's unit balls.
Eigen::MatrixXd leaf_covariance(const Window& w, const ModelParams& m, int lo, int hi = INT_MAX);
PsdReport gamma_psd_check(const Window& w, const CovarianceSpec& spec);

// Test function supported on the positive side of the reflection hyperplane
// (odd p). Throws DomainError when a ball meets the sign-0 locus or the
// negative side.
void check_positive_support(const Window& w, const BallFunction& f);
BallAddress reflect(const Window& w, const BallAddress& u);

// M_ij = int int f_i(theta x) C(x, y) f_j(y) dx dy.
PsdReport os_gram(const Window& w, const std::vector<BallFunction>& fns, const CovarianceSpec& spec);

// All unit balls of the window on the positive side, as indicators.
std::vector<BallFunction> positive_unit_indicators(const Window& w);

struct OsWitness {
  std::vector<BallFunction> fns;
  PsdReport report;
  double relative_min = 0.0;  // min eigenvalue / norm
  int trials = 0;
};

// Random search for cutoff-kernel test-function collections whose OS Gram
// matrix has the most negative relative eigenvalue.
OsWitness search_cutoff_witness(const Window& w, const CovarianceSpec& spec, int trials, int max_fns,
                                std::mt19937_64& rng);

struct WickVariance {
  double value = 0.0;
  std::string warning;  // set when 4[phi] >= d
};

// Var(int :phi_r^2: f) = 2 int int C_r(x,y)^2 f(x) f(y).
WickVariance wick_square_smeared_variance(const Window& w, const BallFunction& f, int r, const CovarianceSpec& spec);

}  // namespace hrg

#pragma once

#include <functional>
#include <random>
#include <vector>

#include "hrg/grid.hpp"

namespace hrg {

// Quadrature resolution of the Fourier-constraint evaluator.
struct BlockOptions {
  int n_xi = 128;            // nodes of the single-variable integral
  int n_t = 64;              // nodes of the constraint (t) integral on [0, t_max]
  double xi_sigmas = 10.0;   // initial xi range, in units of sigma
  double xi_widths = 12.0;   // refined xi range, in units of the tilted width
  double t_decay = 90.0;     // t_max solves b*v*t^2/2 = t_decay/2
};

// A group of children sharing the same log Boltzmann factor.
struct BlockFactor {
  std::function<double(double)> log_value;
  int multiplicity = 1;
};

// Replaces one copy of `factor` by the same factor times ratio(x).
struct BlockMark {
  int factor = 0;
  std::function<double(double)> ratio;
};

struct BlockResult {
  double log_value = 0.0;  // log E[prod_i G_i(a + zeta_i)]
  double ratio = 1.0;      // (marked expectation) / (unmarked expectation)
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Expectations over the zero-sum Gaussian block (zeta_1..zeta_b), covariance
// sigma^2 (I - 11^T / b). The default evaluator conditions i.i.d. N(0, sigma^2)
// variables on sum = 0 through a Fourier integral over the constraint
// multiplier. Every factor is tilted by a common exp(kappa xi), which is
// invisible on the constraint surface and removes the oscillation that would
// otherwise cancel catastrophically.
class ZeroSumBlock {
 public:
  ZeroSumBlock(int b, double sigma, BlockOptions opt = {});

  int size() const { return b_; }
  double sigma() const { return sigma_; }

  BlockResult evaluate(double a, const std::vector<BlockFactor>& factors,
                       const std::vector<BlockMark>& marks = {}) const;

  // All b children carry the grid function `values` (a log factor). Returns
  // log E[prod F(a + zeta_i)] and adds d/d values[j] of it into grad.
  double evaluate_with_gradient(double a, const SymmetricGrid& grid,
                                const std::vector<double>& values,
                                std::vector<double>* grad) const;

  // Plain Monte Carlo over supplied block draws (each of length b). Children
  // are assigned to factor groups in order. Returns the estimate of
  // E[prod G_i(a + zeta_i)] (not its log).
  McEstimate monte_carlo(double a, const std::vector<BlockFactor>& factors,
                         const std::vector<std::vector<double>>& draws) const;

  std::vector<double> draw(std::mt19937_64& rng) const;

 private:
  struct Tilt;
  Tilt prepare(double a, const std::vector<BlockFactor>& factors) const;

  int b_;
  double sigma_;
  BlockOptions opt_;
};

}  // namespace hrg

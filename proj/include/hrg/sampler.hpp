#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hrg/correlator.hpp"
#include "hrg/gaussian_field.hpp"
#include "hrg/model.hpp"
#include "hrg/tree.hpp"

namespace hrg {

// Per-leaf log Boltzmann factor of a window measure.
class LeafPotential {
 public:
  LeafPotential(const Window& w, const ModelParams& m, const InteractionSpec& spec);
  double operator()(std::int64_t leaf, double phi) const;

 private:
  std::vector<double> g_, mu_;
  double a_ = 1.0;
  std::optional<BoltzmannFactor> custom_;
};

struct ChainState {
  FieldConfig field;
  std::vector<double> phi;  // leaf fields, kept in sync with field
  double log_density = 0.0;
  std::uint64_t stream = 0;
  std::int64_t sweeps = 0;
};

ChainState initial_state(const Window& w, const ModelParams& m, const LeafPotential& v, std::uint64_t stream);
// Unnormalized log density of the window measure, recomputed from scratch.
double log_density(const FieldConfig& f, const Window& w, const ModelParams& m, const LeafPotential& v);

struct SweepStats {
  std::vector<std::int64_t> proposed, accepted;  // per layer, index S is the root move
  double rate(int k) const { return proposed[k] ? static_cast<double>(accepted[k]) / proposed[k] : 0.0; }
};

// One pass over every sibling family (b pairwise transfers each) and one move
// of the root field. steps has S + 1 entries. Transfers are rounded to
// multiples of 2^-40 so sibling sums stay exactly zero.
void metropolis_sweep(ChainState& s, const Window& w, const ModelParams& m, const LeafPotential& v,
                      const std::vector<double>& steps, std::mt19937_64& rng, SweepStats* stats = nullptr);

struct SamplerOptions {
  int n_chains = 4;
  int sweeps = 20000;
  int burn_in = 2000;
  std::uint64_t seed = 1;
  double target_accept = 0.4;
  int tune_interval = 50;  // burn-in sweeps between step-size updates
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double tau = 1.0;   // integrated autocorrelation time, averaged over chains
  double rhat = 1.0;  // split R-hat
  std::vector<double> chain_means;
};

struct SamplerReport {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  std::vector<Estimate> pair_estimates;
  // Average of phi(x) phi(y) over all pairs with |x - y| = p^k, k = 0..S
  // (k = 0 is the pointwise variance).
  std::vector<Estimate> class_estimates;
  std::vector<double> acceptance;  // per layer, root last, after burn-in
  std::vector<double> steps;
  std::vector<std::string> warnings;
};

SamplerReport run_chains(const Window& w, const ModelParams& m, const InteractionSpec& spec,
                         const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                         const SamplerOptions& opt);

// Integrated autocorrelation time with Sokal's automatic window (c = 5).
double integrated_autocorrelation_time(const std::vector<double>& series);
// Split R-hat over chains of equal length.
double split_rhat(const std::vector<std::vector<double>>& chains);

}  // namespace hrg

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hrg/block_integral.hpp"
#include "hrg/grid.hpp"
#include "hrg/model.hpp"
#include "hrg/rg_flow.hpp"
#include "hrg/tree.hpp"

namespace hrg {

struct Coupling {
  double g = 0.0;
  double mu = 0.0;
  bool operator==(const Coupling& o) const = default;
};

// Couplings of exp(-g :phi^4: - mu :phi^2:) per unit ball (Wick ordering with
// respect to the pointwise variance), or a custom uniform leaf factor.
struct InteractionSpec {
  Coupling uniform_coupling;
  std::map<std::int64_t, Coupling> overrides;  // leaf index -> coupling
  std::optional<BoltzmannFactor> leaf;           // replaces uniform_coupling

  static InteractionSpec uniform(double g, double mu);
  static InteractionSpec custom(const BoltzmannFactor& f);
  bool is_uniform() const { return overrides.empty(); }
  void validate() const;
};

enum class RootMode {
  kGaussian,  // field from layers >= S drawn from its Gaussian law
  kPinned,    // field from layers >= S set to 0
};

struct CorrelatorOptions {
  int grid_n = 513;
  double phi_max = 12.0;
  BlockOptions block;
  RootMode root = RootMode::kGaussian;
};

// Exact window expectations by a bottom-up fold over the tree. Layer-k
// tables live on the base grid scaled by p^(-k[phi]), the natural width of the
// field accumulated above layer k. Tables of unmarked vertices are interned by
// the multiset of their children, so a uniform spec costs one table per layer.
class Correlator {
 public:
  Correlator(const Window& w, const ModelParams& m, InteractionSpec spec, CorrelatorOptions opt = {});

  const Window& window() const { return w_; }
  const ModelParams& model() const { return m_; }

  double log_partition();
  // E[prod_i phi(leaf_i)], leaves given by dense index (repeats allowed).
  double moment(const std::vector<std::int64_t>& leaves);
  double two_point(const PAdicPoint& x, const PAdicPoint& y);
  double four_point(const PAdicPoint& x1, const PAdicPoint& x2, const PAdicPoint& x3, const PAdicPoint& x4);

  std::int64_t leaf_index(const PAdicPoint& x) const;
  SymmetricGrid layer_grid(int k) const;

 private:
  struct Node {
    int layer = 0;
    std::vector<std::pair<int, int>> children;  // (table id, multiplicity)
    int leaf_kind = -1;                         // layer 0 only
  };

  int vertex_id(int k, std::int64_t index);
  const std::vector<double>& table(int id);
  double leaf_log(int kind, double x) const;
  std::function<double(double)> log_function(int id);
  ZeroSumBlock block_for(int layer) const;
  // Integrals over the root field of exp(T) and of exp(T) * ratio.
  double root_log_mass(const std::vector<double>& log_t) const;
  double root_mean(const std::vector<double>& log_t, const std::vector<double>& ratio) const;

  Window w_;
  ModelParams m_;
  InteractionSpec spec_;
  CorrelatorOptions opt_;
  SymmetricGrid base_;
  std::vector<Coupling> leaf_kinds_;
  std::vector<Node> nodes_;
  std::map<std::pair<int, std::vector<std::pair<int, int>>>, int> intern_;
  std::unordered_map<int, std::vector<double>> tables_;
  std::map<std::pair<int, std::int64_t>, int> vertex_cache_;
};

double partition_function(const Window& w, const ModelParams& m, const InteractionSpec& spec,
                          const CorrelatorOptions& opt = {});
double two_point(const PAdicPoint& x, const PAdicPoint& y, const Window& w, const ModelParams& m,
                 const InteractionSpec& spec, const CorrelatorOptions& opt = {});
double four_point(const PAdicPoint& x1, const PAdicPoint& x2, const PAdicPoint& x3, const PAdicPoint& x4,
                  const Window& w, const ModelParams& m, const InteractionSpec& spec,
                  const CorrelatorOptions& opt = {});

// Ordinary least squares y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  int n = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ExponentFit {
  LineFit fit;                      // log value against log distance
  std::vector<int> distance_exps;   // k with distance p^k
  std::vector<double> values;
  double target = 0.0;              // -2[phi]
  double relative_deviation = 0.0;  // |slope - target| / |target|
  std::string excluded;             // fit-window metadata
};

// Slope of log two_point against log distance over distances p^1 .. p^(S-1).
ExponentFit critical_exponent_fit(Correlator& c);

struct OpeReport {
  std::vector<int> distance_exps;   // |x - y| = p^k
  std::vector<double> four_point;
  std::vector<double> leading;      // two_point(x, y) * two_point(z1, z2)
  std::vector<double> residual;
  double coefficient = 0.0;         // two_point(x, y) |x - y|^(2[phi]), averaged
  LineFit residual_fit;             // log |residual| against log |x - y|
};

// y runs over the points at distance p^k from x for k in ks; spectators must
// satisfy |z_i - x| >= p^2 max |x - y|.
OpeReport ope_leading_check(Correlator& c, const PAdicPoint& x, const std::vector<int>& ks, const PAdicPoint& z1,
                            const PAdicPoint& z2);

struct RobustnessRow {
  std::int64_t x = 0, y = 0;  // leaf indices of the probe pair
  int distance_exp = 0;       // distance of the pair from the corridor, p^k
  double base = 0.0;
  double perturbed = 0.0;
  double relative_change = 0.0;
};

// Couplings on the corridor leaves are shifted by (dg, dmu); probes are
// sibling pairs at every available distance from the corridor unless given.
std::vector<RobustnessRow> robustness_experiment(const Window& w, const ModelParams& m, const InteractionSpec& spec,
                                                 const std::vector<std::int64_t>& corridor, double dg, double dmu,
                                                 const CorrelatorOptions& opt = {},
                                                 std::vector<std::pair<std::int64_t, std::int64_t>> probes = {});

}  // namespace hrg

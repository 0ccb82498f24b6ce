#include "hrg/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "hrg/error.hpp"
#include "hrg/parallel.hpp"

namespace hrg {

namespace {

constexpr double kLattice = 1.0 / 1099511627776.0;  // 2^-40

double quantize(double x) { return std::nearbyint(x / kLattice) * kLattice; }

}  // namespace

LeafPotential::LeafPotential(const Window& w, const ModelParams& m, const InteractionSpec& spec)
    : g_(w.leaf_count(), spec.uniform_coupling.g),
      mu_(w.leaf_count(), spec.uniform_coupling.mu),
      a_(m.wick_variance()),
      custom_(spec.leaf) {
  spec.validate();
  for (const auto& [i, c] : spec.overrides) {
    if (i < 0 || i >= w.leaf_count()) throw DomainError("coupling override outside the window");
    g_[i] = c.g;
    mu_[i] = c.mu;
  }
}

double LeafPotential::operator()(std::int64_t leaf, double phi) const {
  if (custom_) return (*custom_)(phi);
  const double x2 = phi * phi;
  return -g_[leaf] * (x2 * x2 - 6.0 * a_ * x2 + 3.0 * a_ * a_) - mu_[leaf] * (x2 - a_);
}

double log_density(const FieldConfig& f, const Window& w, const ModelParams& m, const LeafPotential& v) {
  const std::vector<double> phi = f.leaf_field();
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += v(static_cast<std::int64_t>(i), phi[i]);
  for (int k = 0; k < w.S(); ++k) {
    const double s2 = m.layer_variance(k);
    for (double z : f.zeta[k]) s -= z * z / (2.0 * s2);
  }
  s -= f.root_field * f.root_field / (2.0 * m.tail_variance(w.S()));
  return s;
}

ChainState initial_state(const Window& w, const ModelParams& m, const LeafPotential& v, std::uint64_t stream) {
  ChainState s;
  s.field.p = w.p();
  s.field.d = w.d();
  s.field.S = w.S();
  s.field.seed = stream;
  s.field.zeta.resize(w.S());
  for (int k = 0; k < w.S(); ++k) s.field.zeta[k].assign(w.layer_size(k), 0.0);
  s.phi.assign(w.leaf_count(), 0.0);
  s.stream = stream;
  s.log_density = log_density(s.field, w, m, v);
  return s;
}

void metropolis_sweep(ChainState& s, const Window& w, const ModelParams& m, const LeafPotential& v,
                      const std::vector<double>& steps, std::mt19937_64& rng, SweepStats* stats) {
  const int b = w.branching();
  const int S = w.S();
  if (static_cast<int>(steps.size()) != S + 1) throw ConfigError("need one step size per layer plus the root");
  if (stats && stats->proposed.empty()) {
    stats->proposed.assign(S + 1, 0);
    stats->accepted.assign(S + 1, 0);
  }
  std::uniform_real_distribution<double> unit(-1.0, 1.0), u01(0.0, 1.0);
  std::uniform_int_distribution<int> child(0, b - 1), other(0, b - 2);

  auto shift_delta = [&](std::int64_t lo, std::int64_t hi, double delta) {
    double d = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) d += v(i, s.phi[i] + delta) - v(i, s.phi[i]);
    return d;
  };

  for (int k = 0; k < S; ++k) {
    auto& zeta = s.field.zeta[k];
    const double s2 = m.layer_variance(k);
    const std::int64_t span = ipow(b, k);
    for (std::int64_t fam = 0; fam < static_cast<std::int64_t>(zeta.size()); fam += b) {
      for (int t = 0; t < b; ++t) {
        const int ci = child(rng);
        int cj = other(rng);
        if (cj >= ci) ++cj;
        const double delta = quantize(steps[k] * unit(rng));
        const std::int64_t i = fam + ci, j = fam + cj;
        const double dz = ((zeta[i] + delta) * (zeta[i] + delta) + (zeta[j] - delta) * (zeta[j] - delta) -
                           zeta[i] * zeta[i] - zeta[j] * zeta[j]) / (2.0 * s2);
        const double dlog = shift_delta(i * span, (i + 1) * span, delta) +
                            shift_delta(j * span, (j + 1) * span, -delta) - dz;
        if (stats) ++stats->proposed[k];
        if (dlog >= 0.0 || std::log(u01(rng)) < dlog) {
          zeta[i] += delta;
          zeta[j] -= delta;
          for (std::int64_t q = i * span; q < (i + 1) * span; ++q) s.phi[q] += delta;
          for (std::int64_t q = j * span; q < (j + 1) * span; ++q) s.phi[q] -= delta;
          s.log_density += dlog;
          if (stats) ++stats->accepted[k];
        }
      }
    }
  }
  const double delta = quantize(steps[S] * unit(rng));
  const double t = m.tail_variance(S);
  const double r = s.field.root_field;
  const double dlog = shift_delta(0, w.leaf_count(), delta) - ((r + delta) * (r + delta) - r * r) / (2.0 * t);
  if (stats) ++stats->proposed[S];
  if (dlog >= 0.0 || std::log(u01(rng)) < dlog) {
    s.field.root_field += delta;
    for (auto& x : s.phi) x += delta;
    s.log_density += dlog;
    if (stats) ++stats->accepted[S];
  }
  ++s.sweeps;
}

double integrated_autocorrelation_time(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return 1.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= n;
  if (c0 <= 0.0) return 1.0;
  double tau = 1.0;
  for (std::size_t t = 1; t < n / 2; ++t) {
    double c = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) c += (x[i] - mean) * (x[i + t] - mean);
    tau += 2.0 * c / (n * c0);
    if (static_cast<double>(t) >= 5.0 * tau) break;
  }
  return std::max(tau, 1.0);
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    const std::size_t h = c.size() / 2;
    if (h < 2) throw DomainError("split R-hat needs at least four draws per chain");
    halves.emplace_back(c.begin(), c.begin() + h);
    halves.emplace_back(c.end() - h, c.end());
  }
  const double n = static_cast<double>(halves.front().size());
  std::vector<double> means, vars;
  for (const auto& h : halves) {
    double m = 0.0;
    for (double v : h) m += v;
    m /= n;
    double s = 0.0;
    for (double v : h) s += (v - m) * (v - m);
    means.push_back(m);
    vars.push_back(s / (n - 1));
  }
  const double mm = static_cast<double>(means.size());
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= mm;
  double b = 0.0, wv = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    b += (means[i] - grand) * (means[i] - grand);
    wv += vars[i];
  }
  b *= n / (mm - 1);
  wv /= mm;
  if (wv <= 0.0) return 1.0;
  return std::sqrt(((n - 1) / n * wv + b / n) / wv);
}

namespace {

Estimate merge(const std::vector<std::vector<double>>& series) {
  Estimate e;
  e.tau = 0.0;
  double var_sum = 0.0;
  for (const auto& s : series) {
    const double n = static_cast<double>(s.size());
    double m = 0.0;
    for (double v : s) m += v;
    m /= n;
    double var = 0.0;
    for (double v : s) var += (v - m) * (v - m);
    var /= (n - 1);
    const double tau = integrated_autocorrelation_time(s);
    e.chain_means.push_back(m);
    e.mean += m;
    e.tau += tau;
    var_sum += var * tau / n;
  }
  const double c = static_cast<double>(series.size());
  e.mean /= c;
  e.tau /= c;
  e.std_error = std::sqrt(var_sum) / c;
  e.rhat = split_rhat(series);
  return e;
}

}  // namespace

SamplerReport run_chains(const Window& w, const ModelParams& m, const InteractionSpec& spec,
                         const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                         const SamplerOptions& opt) {
  if (opt.n_chains < 2) throw ConfigError("need at least two chains for R-hat");
  if (opt.sweeps < 8 || opt.burn_in < 0) throw ConfigError("sweeps must be >= 8 and burn-in >= 0");
  for (const auto& [x, y] : pairs)
    if (x < 0 || y < 0 || x >= w.leaf_count() || y >= w.leaf_count()) throw DomainError("probe leaf outside the window");
  const LeafPotential v(w, m, spec);
  const int S = w.S();
  const int b = w.branching();
  const int n_est = static_cast<int>(pairs.size()) + S + 1;

  struct ChainOut {
    std::vector<std::vector<double>> series;
    SweepStats stats;
    std::vector<double> steps;
  };
  std::vector<ChainOut> out(opt.n_chains);
  parallel_for(opt.n_chains, [&](int c) {
    std::seed_seq seq{static_cast<std::uint64_t>(opt.seed), static_cast<std::uint64_t>(c)};
    std::mt19937_64 rng(seq);
    ChainState s = initial_state(w, m, v, static_cast<std::uint64_t>(c));
    std::vector<double> steps(S + 1);
    for (int k = 0; k < S; ++k) steps[k] = 2.0 * std::sqrt(m.vertex_variance(k));
    steps[S] = 2.0 * std::sqrt(m.tail_variance(S));

    SweepStats window_stats;
    for (int t = 0; t < opt.burn_in; ++t) {
      metropolis_sweep(s, w, m, v, steps, rng, &window_stats);
      if ((t + 1) % opt.tune_interval == 0) {
        for (int k = 0; k <= S; ++k) steps[k] *= std::exp(2.0 * (window_stats.rate(k) - opt.target_accept));
        window_stats = SweepStats{};
      }
    }
    ChainOut& o = out[c];
    o.series.assign(n_est, std::vector<double>());
    for (auto& sv : o.series) sv.reserve(opt.sweeps);
    std::vector<double> sums, prev;
    for (int t = 0; t < opt.sweeps; ++t) {
      metropolis_sweep(s, w, m, v, steps, rng, &o.stats);
      int e = 0;
      for (const auto& [x, y] : pairs) o.series[e++].push_back(s.phi[x] * s.phi[y]);
      // Pair sums by join layer from block sums of the leaf field.
      sums = s.phi;
      double prev_sq = 0.0;
      for (double z : sums) prev_sq += z * z;
      o.series[e++].push_back(prev_sq / static_cast<double>(sums.size()));
      for (int k = 1; k <= S; ++k) {
        std::vector<double> next(sums.size() / b, 0.0);
        for (std::size_t i = 0; i < sums.size(); ++i) next[i / b] += sums[i];
        double sq = 0.0;
        for (double z : next) sq += z * z;
        const double count = static_cast<double>(ipow(b, S - k)) * static_cast<double>(ipow(b, 2 * k - 1)) * (b - 1);
        o.series[e++].push_back((sq - prev_sq) / count);
        prev_sq = sq;
        sums = std::move(next);
      }
    }
    o.steps = steps;
  });

  SamplerReport r;
  r.pairs = pairs;
  for (int e = 0; e < n_est; ++e) {
    std::vector<std::vector<double>> series;
    for (auto& o : out) series.push_back(std::move(o.series[e]));
    Estimate est = merge(series);
    if (est.rhat > 1.1) r.warnings.push_back("R-hat " + std::to_string(est.rhat) + " > 1.1 for estimator " + std::to_string(e));
    (e < static_cast<int>(pairs.size()) ? r.pair_estimates : r.class_estimates).push_back(std::move(est));
  }
  r.acceptance.assign(S + 1, 0.0);
  for (int k = 0; k <= S; ++k) {
    std::int64_t pr = 0, ac = 0;
    for (const auto& o : out) {
      pr += o.stats.proposed[k];
      ac += o.stats.accepted[k];
    }
    r.acceptance[k] = pr ? static_cast<double>(ac) / pr : 0.0;
  }
  r.steps = out.front().steps;
  return r;
}

}  // namespace hrg

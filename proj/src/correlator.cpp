#include "hrg/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "hrg/error.hpp"
#include "hrg/parallel.hpp"

namespace hrg {

InteractionSpec InteractionSpec::uniform(double g, double mu) {
  InteractionSpec s;
  s.uniform_coupling = {g, mu};
  return s;
}

InteractionSpec InteractionSpec::custom(const BoltzmannFactor& f) {
  InteractionSpec s;
  s.leaf = f;
  return s;
}

void InteractionSpec::validate() const {
  auto check = [](const Coupling& c) {
    if (!(c.g >= 0.0) || !std::isfinite(c.mu)) throw ConfigError("couplings need g >= 0 and finite mu");
  };
  check(uniform_coupling);
  for (const auto& [i, c] : overrides) check(c);
  if (leaf && leaf->max_asymmetry() > 1e-12) throw ConfigError("custom leaf factor must be even");
  if (leaf && !overrides.empty()) throw ConfigError("per-ball couplings cannot be combined with a custom leaf factor");
}

Correlator::Correlator(const Window& w, const ModelParams& m, InteractionSpec spec, CorrelatorOptions opt)
    : w_(w), m_(m), spec_(std::move(spec)), opt_(opt) {
  m_.validate();
  spec_.validate();
  if (w_.p() != m_.p || w_.d() != m_.d) throw ConfigError("window and model disagree on p or d");
  if (opt_.grid_n < 5 || opt_.grid_n % 2 == 0) throw ConfigError("grid N must be odd and at least 5");
  base_ = SymmetricGrid(opt_.grid_n, opt_.phi_max);
  leaf_kinds_.push_back(spec_.uniform_coupling);
  for (const auto& [i, c] : spec_.overrides) {
    if (i < 0 || i >= w_.leaf_count()) throw DomainError("coupling override outside the window");
    if (std::find(leaf_kinds_.begin(), leaf_kinds_.end() , c) == leaf_kinds_.end()) leaf_kinds_.push_back(c);
  }
}

SymmetricGrid Correlator::layer_grid(int k) const {
  return base_.scaled(std::pow(static_cast<double>(m_.p), -k * m_.dim_phi()));
}

std::int64_t Correlator::leaf_index(const PAdicPoint& x) const { return w_.index(w_.ball_of(x, 0)); }

double Correlator::leaf_log(int kind, double x) const {
  if (spec_.leaf && kind == 0) return (*spec_.leaf)(x);
  const Coupling& c = leaf_kinds_[kind];
  const double a = m_.wick_variance();
  return -c.g * wick_monomial(4, a, x) - c.mu * wick_monomial(2, a, x);
}

int Correlator::vertex_id(int k, std::int64_t index) {
  if (spec_.is_uniform()) index = 0;
  const auto key = std::make_pair(k, index);
  if (auto it = vertex_cache_.find(key); it != vertex_cache_.end()) return it->second;
  std::vector<std::pair<int, int>> comp;
  int leaf_kind = -1;
  if (k == 0) {
    leaf_kind = 0;
    if (auto o = spec_.overrides.find(index); o != spec_.overrides.end())
      leaf_kind = static_cast<int>(std::find(leaf_kinds_.begin(), leaf_kinds_.end(), o->second) - leaf_kinds_.begin());
    comp.emplace_back(leaf_kind, 0);
  } else {
    std::vector<int> ids;
    const int b = w_.branching();
    for (int c = 0; c < b; ++c) ids.push_back(vertex_id(k - 1, index * b + c));
    std::sort(ids.begin(), ids.end());
    for (int id : ids) {
      if (!comp.empty() && comp.back().first == id) ++comp.back().second;
      else comp.emplace_back(id, 1);
    }
  }
  const auto ikey = std::make_pair(k, comp);
  int id;
  if (auto it = intern_.find(ikey); it != intern_.end()) {
    id = it->second;
  } else {
    id = static_cast<int>(nodes_.size());
    Node n;
    n.layer = k;
    n.leaf_kind = leaf_kind;
    if (k > 0) n.children = comp;
    nodes_.push_back(std::move(n));
    intern_.emplace(ikey, id);
  }
  vertex_cache_.emplace(key, id);
  return id;
}

ZeroSumBlock Correlator::block_for(int layer) const {
  return ZeroSumBlock(w_.branching(), std::sqrt(m_.layer_variance(layer - 1)), opt_.block);
}

std::function<double(double)> Correlator::log_function(int id) {
  const Node& n = nodes_[id];
  if (n.layer == 0) {
    const int kind = n.leaf_kind;
    return [this, kind](double x) { return leaf_log(kind, x); };
  }
  const std::vector<double>* t = &table(id);
  const SymmetricGrid g = layer_grid(n.layer);
  return [t, g](double x) { return g.interpolate(*t, x); };
}

const std::vector<double>& Correlator::table(int id) {
  if (auto it = tables_.find(id); it != tables_.end()) return it->second;
  const Node node = nodes_[id];
  std::vector<BlockFactor> factors;
  for (const auto& [child, mult] : node.children) factors.push_back({log_function(child), mult});
  const SymmetricGrid g = layer_grid(node.layer);
  const ZeroSumBlock block = block_for(node.layer);
  const int m = g.center();
  std::vector<double> t(g.size());
  parallel_for(m + 1, [&](int j) { t[m + j] = block.evaluate(g.node(m + j), factors).log_value; });
  for (int j = 1; j <= m; ++j) t[m - j] = t[m + j];
  for (double v : t)
    if (!std::isfinite(v)) throw NumericError("vertex table is not finite");
  return tables_.emplace(id, std::move(t)).first->second;
}

double Correlator::root_log_mass(const std::vector<double>& log_t) const {
  const SymmetricGrid g = layer_grid(w_.S());
  if (opt_.root == RootMode::kPinned) return log_t[g.center()];
  const double var = m_.tail_variance(w_.S());
  double mx = -HUGE_VAL;
  for (int i = 0; i < g.size(); ++i) mx = std::max(mx, log_t[i] - g.node(i) * g.node(i) / (2.0 * var));
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double w = (i == 0 || i == g.size() - 1) ? 0.5 : 1.0;
    s += w * std::exp(log_t[i] - g.node(i) * g.node(i) / (2.0 * var) - mx);
  }
  return mx + std::log(s * g.spacing() / std::sqrt(2.0 * std::numbers::pi * var));
}

double Correlator::root_mean(const std::vector<double>& log_t, const std::vector<double>& ratio) const {
  const SymmetricGrid g = layer_grid(w_.S());
  if (opt_.root == RootMode::kPinned) return ratio[g.center()];
  const double var = m_.tail_variance(w_.S());
  double mx = -HUGE_VAL;
  for (int i = 0; i < g.size(); ++i) mx = std::max(mx, log_t[i] - g.node(i) * g.node(i) / (2.0 * var));
  double s0 = 0.0, s1 = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double w = ((i == 0 || i == g.size() - 1) ? 0.5 : 1.0) *
                     std::exp(log_t[i] - g.node(i) * g.node(i) / (2.0 * var) - mx);
    s0 += w;
    s1 += w * ratio[i];
  }
  return s1 / s0;
}

double Correlator::log_partition() { return root_log_mass(table(vertex_id(w_.S(), 0))); }

double Correlator::moment(const std::vector<std::int64_t>& leaves) {
  if (leaves.empty()) return 1.0;
  struct Marked {
    std::function<double(double)> ratio;
    int parity = 0;
  };
  std::map<std::int64_t, int> mult;
  for (auto i : leaves) {
    if (i < 0 || i >= w_.leaf_count()) throw DomainError("marked leaf outside the window");
    ++mult[i];
  }
  std::map<std::int64_t, Marked> level;
  for (const auto& [i, m] : mult)
    level[i] = {[m](double x) { return std::pow(x, m); }, m % 2};

  const int b = w_.branching();
  std::vector<std::shared_ptr<std::vector<double>>> keep;  // ratio tables referenced by closures
  std::vector<double> root_ratio;
  for (int k = 1; k <= w_.S(); ++k) {
    std::map<std::int64_t, std::vector<std::int64_t>> parents;
    for (const auto& [i, mk] : level) parents[i / b].push_back(i);
    std::map<std::int64_t, Marked> next;
    const SymmetricGrid g = layer_grid(k);
    const ZeroSumBlock block = block_for(k);
    for (const auto& [parent, marked] : parents) {
      std::vector<int> group_of_id;
      std::vector<BlockFactor> factors;
      auto group = [&](int id) {
        for (std::size_t q = 0; q < group_of_id.size(); ++q)
          if (group_of_id[q] == id) return static_cast<int>(q);
        group_of_id.push_back(id);
        factors.push_back({log_function(id), 0});
        return static_cast<int>(group_of_id.size()) - 1;
      };
      for (int c = 0; c < b; ++c) ++factors[group(vertex_id(k - 1, parent * b + c))].multiplicity;
      std::vector<BlockMark> marks;
      int parity = 0;
      for (auto child : marked) {
        marks.push_back({group(vertex_id(k - 1, child)), level[child].ratio});
        parity ^= level[child].parity;
      }
      const int m = g.center();
      auto r = std::make_shared<std::vector<double>>(g.size());
      parallel_for(m + 1, [&](int j) { (*r)[m + j] = block.evaluate(g.node(m + j), factors, marks).ratio; });
      for (int j = 1; j <= m; ++j) (*r)[m - j] = parity ? -(*r)[m + j] : (*r)[m + j];
      if (parity) (*r)[m] = 0.0;
      keep.push_back(r);
      if (k == w_.S()) root_ratio = *r;
      next[parent] = {[r, g](double x) { return g.interpolate(*r, x); }, parity};
    }
    level = std::move(next);
  }
  return root_mean(table(vertex_id(w_.S(), 0)), root_ratio);
}

double Correlator::two_point(const PAdicPoint& x, const PAdicPoint& y) {
  return moment({leaf_index(x), leaf_index(y)});
}

double Correlator::four_point(const PAdicPoint& x1, const PAdicPoint& x2, const PAdicPoint& x3,
                              const PAdicPoint& x4) {
  return moment({leaf_index(x1), leaf_index(x2), leaf_index(x3), leaf_index(x4)});
}

double partition_function(const Window& w, const ModelParams& m, const InteractionSpec& spec,
                          const CorrelatorOptions& opt) {
  return Correlator(w, m, spec, opt).log_partition();
}

double two_point(const PAdicPoint& x, const PAdicPoint& y, const Window& w, const ModelParams& m,
                 const InteractionSpec& spec, const CorrelatorOptions& opt) {
  return Correlator(w, m, spec, opt).two_point(x, y);
}

double four_point(const PAdicPoint& x1, const PAdicPoint& x2, const PAdicPoint& x3, const PAdicPoint& x4,
                  const Window& w, const ModelParams& m, const InteractionSpec& spec,
                  const CorrelatorOptions& opt) {
  return Correlator(w, m, spec, opt).four_point(x1, x2, x3, x4);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || y.size() != x.size()) throw DomainError("line fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("line fit needs distinct abscissae");
  LineFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (int i = 0; i < n; ++i) {
      const double e = y[i] - f.intercept - f.slope * x[i];
      ssr += e * e;
    }
    f.slope_stderr = std::sqrt(ssr / (n - 2) / sxx);
  }
  return f;
}

namespace {

// Leaf at distance p^k from leaf ix (k >= 1): change the path label that
// separates layer k from layer k - 1.
std::int64_t leaf_at_distance(const Window& w, std::int64_t ix, int k) {
  const std::int64_t stride = ipow(w.branching(), k - 1);
  const std::int64_t digit = (ix / stride) % w.branching();
  return ix + ((digit + 1) % w.branching() - digit) * stride;
}

int leaf_join(const Window& w, std::int64_t a, std::int64_t b) {
  int k = 0;
  for (; a != b; a /= w.branching(), b /= w.branching()) ++k;
  return k;
}

}  // namespace

ExponentFit critical_exponent_fit(Correlator& c) {
  const Window& w = c.window();
  if (w.S() - 1 < 3) throw DomainError("exponent fit needs at least three distances (S >= 4)");
  ExponentFit out;
  std::vector<double> xs, ys;
  const double lp = std::log(static_cast<double>(w.p()));
  for (int k = 1; k <= w.S() - 1; ++k) {
    const double v = c.moment({0, leaf_at_distance(w, 0, k)});
    if (!(v > 0.0)) throw NumericError("two-point function is not positive; cannot fit a power law");
    out.distance_exps.push_back(k);
    out.values.push_back(v);
    xs.push_back(k * lp);
    ys.push_back(std::log(v));
  }
  out.fit = fit_line(xs, ys);
  out.target = -kLayerVarianceExponent * c.model().dim_phi();
  out.relative_deviation = std::fabs(out.fit.slope - out.target) / std::fabs(out.target);
  out.excluded = "same-unit-ball plateau (distance <= 1) and outermost shell (distance p^S)";
  return out;
}

OpeReport ope_leading_check(Correlator& c, const PAdicPoint& x, const std::vector<int>& ks, const PAdicPoint& z1,
                            const PAdicPoint& z2) {
  const Window& w = c.window();
  if (ks.size() < 2) throw DomainError("OPE fit needs at least two separations");
  const int kmax = *std::max_element(ks.begin(), ks.end());
  if (*std::min_element(ks.begin(), ks.end()) < 1 || kmax > w.S()) throw DomainError("separation outside the window");
  const std::int64_t ix = c.leaf_index(x), i1 = c.leaf_index(z1), i2 = c.leaf_index(z2);
  if (leaf_join(w, ix, i1) < kmax + 2 || leaf_join(w, ix, i2) < kmax + 2)
    throw DomainError("spectators are not far enough from x for the requested separations");
  OpeReport r;
  const double g12 = c.moment({i1, i2});
  const double lp = std::log(static_cast<double>(w.p()));
  const double two_phi = kLayerVarianceExponent * c.model().dim_phi();
  std::vector<double> xs, ys;
  for (int k : ks) {
    const std::int64_t iy = leaf_at_distance(w, ix, k);
    const double g4 = c.moment({ix, iy, i1, i2});
    const double gxy = c.moment({ix, iy});
    r.distance_exps.push_back(k);
    r.four_point.push_back(g4);
    r.leading.push_back(gxy * g12);
    r.residual.push_back(g4 - gxy * g12);
    r.coefficient += gxy * std::exp(two_phi * k * lp) / ks.size();
    if (r.residual.back() != 0.0) {
      xs.push_back(k * lp);
      ys.push_back(std::log(std::fabs(r.residual.back())));
    }
  }
  if (xs.size() >= 2) r.residual_fit = fit_line(xs, ys);
  return r;
}

std::vector<RobustnessRow> robustness_experiment(const Window& w, const ModelParams& m, const InteractionSpec& spec,
                                                 const std::vector<std::int64_t>& corridor, double dg, double dmu,
                                                 const CorrelatorOptions& opt,
                                                 std::vector<std::pair<std::int64_t, std::int64_t>> probes) {
  if (spec.leaf) throw ConfigError("corridor perturbations need coupling-based leaves");
  const std::set<std::int64_t> cset(corridor.begin(), corridor.end());
  auto dist_to_corridor = [&](std::int64_t x) {
    int best = INT_MAX;
    for (auto c : cset) best = std::min(best, leaf_join(w, x, c));
    return best;
  };
  if (probes.empty() && !cset.empty()) {
    std::set<int> seen;
    for (std::int64_t x = 0; x < w.leaf_count(); x += w.branching()) {
      for (std::int64_t a = x; a + 1 < x + w.branching(); ++a) {
        const int da = dist_to_corridor(a), db = dist_to_corridor(a + 1);
        if (da != db || seen.count(da)) continue;
        seen.insert(da);
        probes.emplace_back(a, a + 1);
        break;
      }
    }
  }
  InteractionSpec pert = spec;
  for (auto c : cset) {
    Coupling base = spec.uniform_coupling;
    if (auto it = spec.overrides.find(c); it != spec.overrides.end()) base = it->second;
    pert.overrides[c] = {base.g + dg, base.mu + dmu};
  }
  Correlator c0(w, m, spec, opt), c1(w, m, pert, opt);
  std::vector<RobustnessRow> rows;
  for (const auto& [x, y] : probes) {
    RobustnessRow r;
    r.x = x;
    r.y = y;
    r.distance_exp = cset.empty() ? INT_MAX : std::min(dist_to_corridor(x), dist_to_corridor(y));
    r.base = c0.moment({x, y});
    r.perturbed = c1.moment({x, y});
    r.relative_change = std::fabs(r.perturbed - r.base) / std::fabs(r.base);
    rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.distance_exp < b.distance_exp; });
  return rows;
}

}  // namespace hrg

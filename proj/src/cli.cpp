#include "hrg/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hrg/agm.hpp"
#include "hrg/checks.hpp"
#include "hrg/correlator.hpp"
#include "hrg/error.hpp"
#include "hrg/gaussian_field.hpp"
#include "hrg/parallel.hpp"
#include "hrg/rg_flow.hpp"
#include "hrg/sampler.hpp"

namespace hrg {

namespace {

using Json = nlohmann::ordered_json;

struct RunConfig {
  int p = 2;
  int d = 3;
  int l = 1;
  double eps = 0.1;
  int S = 3;
  int grid_n = 513;
  double phi_max = 12.0;
  std::string backend = "fourier";
  int mc_samples = 20000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: HRG_THREADS or 1
  double g = 0.0;
  double mu = 0.0;
  std::string out;

  // Subcommand settings.
  std::string rep = "grid";
  int order = 8;
  std::vector<double> eps_list;
  std::optional<double> tune_g;
  int horizon = 60;
  double tolerance = 1e-12;
  double mu_lo = -1.0, mu_hi = 1.0;
  std::string line = "bare";
  int steps = 20;
  std::string pairs_file, couplings_file, root = "gaussian";
  int chains = 4, sweeps = 20000, burn_in = 2000;
  std::string diag_file;
  int trials = 1000;
  std::string word;
  int word_length = 6;
  std::optional<int> cutoff;
  int search = 0, max_fns = 8;
  std::string fixture;
  double agm_a = 1.0, agm_b = 1.0;

  bool p_given = false, d_given = false;
};

bool is_prime(int n) {
  if (n < 2) return false;
  for (int q = 2; q * q <= n; ++q)
    if (n % q == 0) return false;
  return true;
}

void validate(const RunConfig& c) {
  std::vector<std::string> msg;
  if (!is_prime(c.p)) msg.push_back("p: must be a prime (got " + std::to_string(c.p) + ")");
  if (c.d < 1) msg.push_back("d: must be at least 1");
  if (c.l < 1) msg.push_back("l: must be at least 1");
  if (!(c.eps >= 0.0 && c.eps < c.d)) msg.push_back("eps: must satisfy 0 <= eps < d");
  if (c.S < 1) msg.push_back("S: must be at least 1");
  if (c.grid_n < 5 || c.grid_n % 2 == 0) msg.push_back("grid-n: must be odd and at least 5");
  if (!(c.phi_max > 0.0)) msg.push_back("phi-max: must be positive");
  if (c.mc_samples < 1) msg.push_back("mc-samples: must be positive");
  if (c.threads < 0) msg.push_back("threads: must be nonnegative");
  if (!msg.empty()) {
    std::string all = "invalid configuration";
    for (const auto& m : msg) all += "\n  " + m;
    throw ConfigError(all);
  }
}

Json config_json(const RunConfig& c, const std::string& command) {
  Json j;
  j["command"] = command;
  j["p"] = c.p;
  j["d"] = c.d;
  j["l"] = c.l;
  j["eps"] = c.eps;
  j["S"] = c.S;
  j["grid_n"] = c.grid_n;
  j["phi_max"] = c.phi_max;
  j["backend"] = c.backend;
  j["mc_samples"] = c.mc_samples;
  j["seed"] = c.seed;
  j["threads"] = thread_count();
  j["g"] = c.g;
  j["mu"] = c.mu;
  if (command == "fixpoint") {
    j["rep"] = c.rep;
    j["order"] = c.order;
  } else if (command == "exponents") {
    j["eps_list"] = c.eps_list;
  } else if (command == "tune") {
    if (c.tune_g) j["tune_g"] = *c.tune_g;
    j["horizon"] = c.horizon;
    j["tolerance"] = c.tolerance;
    j["mu_lo"] = c.mu_lo;
    j["mu_hi"] = c.mu_hi;
    j["line"] = c.line;
  } else if (command == "flow") {
    j["steps"] = c.steps;
  } else if (command == "correlate") {
    j["pairs"] = c.pairs_file;
    j["couplings"] = c.couplings_file;
    j["root"] = c.root;
  } else if (command == "sample") {
    j["pairs"] = c.pairs_file;
    j["couplings"] = c.couplings_file;
    j["chains"] = c.chains;
    j["sweeps"] = c.sweeps;
    j["burn_in"] = c.burn_in;
  } else if (command == "conformal-check") {
    j["trials"] = c.trials;
    j["word"] = c.word;
    j["word_length"] = c.word_length;
  } else if (command == "os-check") {
    if (c.cutoff) j["cutoff"] = *c.cutoff;
    j["search"] = c.search;
    j["max_fns"] = c.max_fns;
    j["fixture"] = c.fixture;
  } else if (command == "agm") {
    j["a"] = c.agm_a;
    j["b"] = c.agm_b;
  }
  return j;
}

Json header(const RunConfig& c, const std::string& command) {
  Json j;
  j["version"] = kVersion;
  j["config"] = config_json(c, command);
  return j;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Output sink: the --out file when set, else the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("out: cannot open '" + path + "' for writing");
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

void write_json(const std::string& path, std::ostream& fallback, const Json& j) {
  Sink s(path, fallback);
  *s << j.dump(2) << "\n";
}

// CSV preamble: the resolved config as comment lines.
void csv_preamble(std::ostream& os, const RunConfig& c, const std::string& command) {
  os << "# hrg " << kVersion << "\n";
  const Json cfg = config_json(c, command);
  for (const auto& [k, v] : cfg.items()) os << "# " << k << " = " << v.dump() << "\n";
}

RGParams rg_params(const RunConfig& c) {
  RGParams r;
  r.model = ModelParams{c.p, c.d, c.eps};
  r.l = c.l;
  r.grid_n = c.grid_n;
  r.phi_max = c.phi_max;
  if (c.backend == "fourier") {
    r.backend = Backend::kFourier;
  } else if (c.backend == "mc") {
    r.backend = Backend::kMonteCarlo;
  } else {
    throw ConfigError("backend: must be 'fourier' or 'mc'");
  }
  r.mc_samples = c.mc_samples;
  r.mc_seed = c.seed;
  r.validate();
  return r;
}

Json complex_json(const std::complex<double>& z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

Json spectrum_json(const Spectrum& s, const RGParams& params, int count) {
  Json eig = Json::array(), dims = Json::array();
  for (int i = 0; i < std::min<int>(count, static_cast<int>(s.values.size())); ++i) {
    eig.push_back(complex_json(s.values[i]));
    const double mod = std::abs(s.values[i]);
    dims.push_back(mod > 0 ? Json(dimension_from_eigenvalue(mod, params)) : Json(nullptr));
  }
  return Json{{"eigenvalues", eig}, {"dimensions", dims}, {"condition", s.condition}, {"warnings", s.warnings}};
}

Json grid_json(const RGParams& p) { return Json{{"n", p.grid_n}, {"phi_max", p.phi_max}}; }

int cmd_fixpoint(const RunConfig& c, std::ostream& out) {
  const RGParams params = rg_params(c);
  Json j = header(c, "fixpoint");
  j["params"] = Json{{"p", c.p}, {"d", c.d}, {"eps", c.eps}, {"l", c.l}, {"dim_phi", params.dim_phi()}};
  j["grid"] = grid_json(params);
  j["representation"] = c.rep;
  FixedPoint fp;
  if (c.rep == "grid") {
    fp = find_fixed_point(params);
  } else if (c.rep == "poly") {
    fp = find_fixed_point_poly(params, c.order);
  } else {
    throw ConfigError("rep: must be 'grid' or 'poly'");
  }
  j["residual"] = fp.residual;
  j["iterations"] = fp.iterations;
  j["g_star"] = fp.projection.g();
  j["mu_star"] = fp.projection.mu();
  j["wick_variance"] = fp.projection.variance;
  j["wick_coefficients"] = fp.projection.c;
  j["gauge"] = "log F(0) = 0";
  Json nodes = Json::array(), logf = Json::array();
  for (int i = 0; i < fp.f.grid.size(); ++i) {
    nodes.push_back(fp.f.grid.node(i));
    logf.push_back(fp.f.log_f[i]);
  }
  j["phi"] = nodes;
  j["log_f"] = logf;
  if (c.rep == "grid") {
    j["spectrum"] = spectrum_json(linearize(fp.f, params), params, 8);
  }
  write_json(c.out, out, j);
  return kExitOk;
}

int cmd_exponents(const RunConfig& c, std::ostream& out) {
  std::vector<double> eps = c.eps_list.empty() ? std::vector<double>{c.eps} : c.eps_list;
  Json j = header(c, "exponents");
  Json rows = Json::array();
  std::ostringstream table;
  table << std::setw(8) << "eps" << std::setw(14) << "[phi]" << std::setw(14) << "lambda2" << std::setw(14)
        << "[phi^2]" << std::setw(14) << "eta2" << std::setw(14) << "eta2/(eps/3)" << "\n";
  for (double e : eps) {
    RunConfig ce = c;
    ce.eps = e;
    validate(ce);
    const ExponentReport r = anomalous_dimension(rg_params(ce));
    const double eta2 = std::fabs(r.eta2) < 1e-13 ? 0.0 : r.eta2;
    table << std::setw(8) << e << std::setw(14) << std::setprecision(8) << r.dim_phi << std::setw(14) << r.lambda2
          << std::setw(14) << r.dim_phi2 << std::setw(14) << eta2 << std::setw(14)
          << (std::isnan(r.ratio) ? std::string("n/a") : fmt(r.ratio).substr(0, 10)) << "\n";
    Json row{{"eps", e},           {"dim_phi", r.dim_phi}, {"lambda2", r.lambda2}, {"dim_phi2", r.dim_phi2},
             {"eta2", eta2},       {"g_star", r.g_star},   {"mu_star", r.mu_star}, {"residual", r.residual},
             {"relevant_count", r.relevant_count}};
    row["ratio"] = std::isnan(r.ratio) ? Json(nullptr) : Json(r.ratio);
    Json lead = Json::array();
    for (const auto& z : r.leading) lead.push_back(complex_json(z));
    row["leading"] = lead;
    rows.push_back(row);
  }
  j["rows"] = rows;
  out << table.str();
  if (!c.out.empty()) write_json(c.out, out, j);
  return kExitOk;
}

int cmd_tune(const RunConfig& c, std::ostream& out) {
  const RGParams params = rg_params(c);
  TuneOptions opt;
  opt.horizon = c.horizon;
  opt.tolerance = c.tolerance;
  opt.mu_lo = c.mu_lo;
  opt.mu_hi = c.mu_hi;
  Json j = header(c, "tune");
  double g = c.tune_g.value_or(c.g);
  std::optional<FixedPoint> fp;
  if (c.line == "fixed-point" || !c.tune_g) {
    fp = find_fixed_point(params);
    j["g_star"] = fp->projection.g();
    j["mu_star"] = fp->projection.mu();
  }
  if (!c.tune_g) g = fp->projection.g();
  if (c.line == "fixed-point") {
    opt.base = &fp->f;
    opt.base_mu = fp->projection.mu();
    g = fp->projection.g();
  } else if (c.line != "bare") {
    throw ConfigError("line: must be 'bare' or 'fixed-point'");
  }
  const TuneResult r = tune_critical_mu(g, params, opt);
  j["g"] = g;
  j["mu_c"] = r.mu_c;
  j["width"] = r.width;
  j["bisections"] = r.bisections;
  write_json(c.out, out, j);
  return kExitOk;
}

int cmd_flow(const RunConfig& c, std::ostream& out) {
  const RGParams params = rg_params(c);
  if (c.steps < 0) throw ConfigError("steps: must be nonnegative");
  const BoltzmannFactor f0 = quartic(c.g, c.mu, params.model.wick_variance()).to_grid(params.grid());
  const auto traj = flow(f0, params, c.steps);
  Sink s(c.out, out);
  csv_preamble(*s, c, "flow");
  *s << "step,c2,c4,residual\n";
  for (const auto& pt : traj) *s << pt.step << "," << fmt(pt.c2) << "," << fmt(pt.c4) << "," << fmt(pt.residual) << "\n";
  if (!traj.empty() && !traj.back().healthy)
    throw NumericError("flow left the grid after step " + std::to_string(traj.back().step));
  return kExitOk;
}

// Leaf token: dense index or a layer-0 ball address.
std::int64_t parse_leaf(const Window& w, const std::string& tok) {
  std::int64_t i = 0;
  if (tok.find(':') != std::string::npos) {
    const BallAddress u = BallAddress::parse(tok);
    if (u.k != 0) throw ConfigError("leaf '" + tok + "' is not a unit ball");
    w.validate(u);
    i = w.index(u);
  } else {
    try {
      std::size_t used = 0;
      i = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("malformed leaf '" + tok + "'");
    }
  }
  if (i < 0 || i >= w.leaf_count()) throw ConfigError("leaf '" + tok + "' outside the window");
  return i;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::vector<std::string> toks;
    for (std::string t; is >> t;) toks.push_back(t);
    if (!toks.empty()) rows.push_back(std::move(toks));
  }
  return rows;
}

std::vector<std::pair<std::int64_t, std::int64_t>> load_pairs(const Window& w, const std::string& path) {
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  if (path.empty()) {
    // Leaf 0 against one leaf per distance class, pointwise variance first.
    std::int64_t y = 1;
    pairs.emplace_back(0, 0);
    for (int k = 1; k <= w.S(); ++k, y *= w.branching()) pairs.emplace_back(0, y);
    return pairs;
  }
  for (const auto& row : read_rows(path)) {
    if (row.size() != 2) throw ConfigError(path + ": each pair line needs two leaves");
    pairs.emplace_back(parse_leaf(w, row[0]), parse_leaf(w, row[1]));
  }
  if (pairs.empty()) throw ConfigError(path + ": no pairs");
  return pairs;
}

InteractionSpec load_spec(const Window& w, const RunConfig& c) {
  InteractionSpec spec = InteractionSpec::uniform(c.g, c.mu);
  if (!c.couplings_file.empty()) {
    for (const auto& row : read_rows(c.couplings_file)) {
      if (row.size() != 3) throw ConfigError(c.couplings_file + ": each line needs 'leaf g mu'");
      try {
        spec.overrides[parse_leaf(w, row[0])] = Coupling{std::stod(row[1]), std::stod(row[2])};
      } catch (const std::invalid_argument&) {
        throw ConfigError(c.couplings_file + ": malformed coupling on leaf " + row[0]);
      }
    }
  }
  spec.validate();
  return spec;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

int leaf_join(const Window& w, std::int64_t x, std::int64_t y) {
  return w.join_layer(w.address(0, x), w.address(0, y));
}

int cmd_correlate(const RunConfig& c, std::ostream& out) {
  const Window w(c.p, c.d, c.S);
  const ModelParams m{c.p, c.d, c.eps};
  m.validate();
  const auto pairs = load_pairs(w, c.pairs_file);
  CorrelatorOptions opt;
  opt.grid_n = c.grid_n;
  opt.phi_max = c.phi_max;
  if (c.root == "gaussian") {
    opt.root = RootMode::kGaussian;
  } else if (c.root == "pinned") {
    opt.root = RootMode::kPinned;
  } else {
    throw ConfigError("root: must be 'gaussian' or 'pinned'");
  }
  Correlator corr(w, m, load_spec(w, c), opt);
  Sink s(c.out, out);
  csv_preamble(*s, c, "correlate");
  *s << "x,y,distance,value\n";
  for (const auto& [x, y] : pairs) {
    const double v = corr.moment({x, y});
    const std::string dist = x == y ? "0" : std::to_string(ipow(c.p, leaf_join(w, x, y)));
    *s << quoted(w.address(0, x).to_string()) << "," << quoted(w.address(0, y).to_string()) << "," << dist << ","
       << fmt(v) << "\n";
  }
  return kExitOk;
}

Json estimate_json(const Estimate& e) {
  return Json{{"mean", e.mean},
              {"std_error", e.std_error},
              {"tau", e.tau},
              {"rhat", e.rhat},
              {"chain_means", e.chain_means}};
}

int cmd_sample(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Window w(c.p, c.d, c.S);
  const ModelParams m{c.p, c.d, c.eps};
  m.validate();
  const auto pairs = load_pairs(w, c.pairs_file);
  SamplerOptions opt;
  opt.n_chains = c.chains;
  opt.sweeps = c.sweeps;
  opt.burn_in = c.burn_in;
  opt.seed = c.seed;
  if (opt.n_chains < 1) throw ConfigError("chains: must be at least 1");
  if (opt.sweeps < 1) throw ConfigError("sweeps: must be at least 1");
  if (opt.burn_in < 0) throw ConfigError("burn-in: must be nonnegative");
  const SamplerReport r = run_chains(w, m, load_spec(w, c), pairs, opt);

  {
    Sink s(c.out, out);
    csv_preamble(*s, c, "sample");
    *s << "x,y,distance,chain,value,stderr\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto [x, y] = pairs[i];
      const std::string head = quoted(w.address(0, x).to_string()) + "," + quoted(w.address(0, y).to_string()) + "," +
                               (x == y ? "0" : std::to_string(ipow(c.p, leaf_join(w, x, y)))) + ",";
      const Estimate& e = r.pair_estimates[i];
      for (std::size_t ch = 0; ch < e.chain_means.size(); ++ch) *s << head << ch << "," << fmt(e.chain_means[ch]) << ",\n";
      *s << head << "merged," << fmt(e.mean) << "," << fmt(e.std_error) << "\n";
    }
  }

  Json j = header(c, "sample");
  j["acceptance"] = r.acceptance;
  j["steps"] = r.steps;
  Json pe = Json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Json e = estimate_json(r.pair_estimates[i]);
    e["x"] = w.address(0, pairs[i].first).to_string();
    e["y"] = w.address(0, pairs[i].second).to_string();
    pe.push_back(e);
  }
  j["pairs"] = pe;
  Json ce = Json::array();
  for (std::size_t k = 0; k < r.class_estimates.size(); ++k) {
    Json e = estimate_json(r.class_estimates[k]);
    e["distance_exp"] = k;
    ce.push_back(e);
  }
  j["distance_classes"] = ce;
  j["warnings"] = r.warnings;
  if (c.diag_file.empty()) {
    err << j.dump(2) << "\n";
  } else {
    write_json(c.diag_file, err, j);
  }
  for (const auto& wmsg : r.warnings) err << "warning: " << wmsg << "\n";
  return kExitOk;
}

int cmd_conformal(const RunConfig& c, std::ostream& out) {
  ConformalCheckOptions opt;
  opt.trials = c.trials;
  opt.seed = c.seed;
  if (c.p_given) opt.p = c.p;
  if (c.d_given) opt.d = c.d;
  if (!c.word.empty()) {
    if (!opt.p) opt.p = c.p;
    if (!opt.d) opt.d = c.d;
    opt.word = c.word;
    MobiusWord::parse(c.word, *opt.p, *opt.d);
  }
  opt.word_length = c.word_length;
  opt.eps = c.eps;
  const auto tallies = conformal_checks(opt);
  Json j = header(c, "conformal-check");
  Json rows = Json::array();
  bool ok = true;
  for (const auto& t : tallies) {
    out << t.name << ": " << t.passed << "/" << t.trials << " pass\n";
    for (const auto& f : t.failures) out << "  failed: " << f << "\n";
    rows.push_back(Json{{"identity", t.name},
                        {"trials", t.trials},
                        {"passed", t.passed},
                        {"redraws", t.redraws},
                        {"failures", t.failures}});
    ok = ok && t.ok();
  }
  j["identities"] = rows;
  if (!c.out.empty()) write_json(c.out, out, j);
  return ok ? kExitOk : kExitCheckFailed;
}

Json ball_function_json(const BallFunction& f) {
  Json terms = Json::array();
  for (const auto& [u, coef] : f.terms) terms.push_back(Json{{"ball", u.to_string()}, {"coef", coef}});
  return terms;
}

Json psd_json(const PsdReport& r) {
  std::vector<double> ev(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
  return Json{{"eigenvalues", ev},
              {"min_eigenvalue", r.min_eigenvalue},
              {"norm", r.norm},
              {"relative_min", r.norm > 0 ? r.min_eigenvalue / r.norm : 0.0}};
}

int cmd_os(const RunConfig& c, std::ostream& out) {
  // Reflection positivity needs odd p; without explicit flags use p = 3, d = 1.
  int p = c.p_given ? c.p : 3, d = c.d_given ? c.d : 1, top = c.S;
  double eps = c.eps;
  std::optional<int> cutoff = c.cutoff;
  std::optional<Json> fixture;
  if (c.search == 0 && !c.fixture.empty()) {
    // A stored witness carries the window and kernel it was found for.
    std::ifstream in(c.fixture);
    if (!in) throw ConfigError("fixture: cannot open '" + c.fixture + "'");
    fixture = Json::parse(in);
    const Json& fc = fixture->at("config");
    p = fc.at("p").get<int>();
    d = fc.at("d").get<int>();
    top = fc.at("S").get<int>();
    eps = fc.at("eps").get<double>();
    if (fc.contains("cutoff")) cutoff = fc.at("cutoff").get<int>();
  }
  const Window w(p, d, top);
  CovarianceSpec spec;
  spec.model = ModelParams{p, d, eps};
  spec.r_uv = cutoff;
  spec.l = c.l;
  spec.validate();
  Json j = header(c, "os-check");
  j["config"]["p"] = p;
  j["config"]["d"] = d;
  j["config"]["S"] = top;
  j["config"]["eps"] = eps;
  if (cutoff) j["config"]["cutoff"] = *cutoff;
  if (c.search > 0) {
    if (!cutoff) throw ConfigError("search: needs --cutoff");
    std::seed_seq seq{c.seed};
    std::mt19937_64 rng(seq);
    const OsWitness wit = search_cutoff_witness(w, spec, c.search, c.max_fns, rng);
    Json fns = Json::array();
    for (const auto& f : wit.fns) fns.push_back(ball_function_json(f));
    j["functions"] = fns;
    j["gram"] = psd_json(wit.report);
    j["trials"] = wit.trials;
    j["verdict"] = wit.relative_min < -1e-6 ? "negative eigenvalue found" : "no negative eigenvalue found";
    write_json(c.fixture.empty() ? c.out : c.fixture, out, j);
    return kExitOk;
  }
  std::vector<BallFunction> fns;
  if (fixture) {
    for (const auto& f : fixture->at("functions")) {
      BallFunction bf;
      for (const auto& t : f) bf.terms.emplace_back(BallAddress::parse(t.at("ball").get<std::string>()), t.at("coef").get<double>());
      fns.push_back(std::move(bf));
    }
  } else {
    fns = positive_unit_indicators(w);
  }
  const PsdReport r = os_gram(w, fns, spec);
  j["function_count"] = fns.size();
  j["gram"] = psd_json(r);
  j["psd"] = r.psd;
  j["verdict"] = r.psd ? "positive semidefinite" : "negative eigenvalue";
  write_json(c.out, out, j);
  // Only the uncut kernel is expected to be positive.
  return (!cutoff && !r.psd) ? kExitCheckFailed : kExitOk;
}

int cmd_agm(const RunConfig& c, std::ostream& out) {
  if (!(c.agm_a > 0.0 && c.agm_b > 0.0)) throw ConfigError("A, B: must be positive");
  const AgmVector v0{c.agm_a, c.agm_b};
  std::vector<AgmIteration> log;
  const double m = agm_limit(v0, 1e-15, &log);
  const double z0 = elliptic_Z(v0);
  Sink s(c.out, out);
  csv_preamble(*s, c, "agm");
  *s << "# Z = " << fmt(z0) << "\n# AGM = " << fmt(m) << "\n# pi/(2 AGM) = " << fmt(std::numbers::pi / (2.0 * m))
     << "\n";
  *s << "step,a,b,gap,Z,Z_change\n";
  for (const auto& it : log) {
    const double z = elliptic_Z(it.v);
    *s << it.step << "," << fmt(it.v.a) << "," << fmt(it.v.b) << "," << fmt(it.gap) << "," << fmt(z) << ","
       << fmt(z - z0) << "\n";
  }
  return kExitOk;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case Error::Kind::kConfig:
    case Error::Kind::kDomain:
      return kExitValidation;
    case Error::Kind::kPrecision:
    case Error::Kind::kNumeric:
      return kExitNumeric;
    case Error::Kind::kCheck:
      return kExitCheckFailed;
  }
  return kExitNumeric;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Hierarchical p-adic field theory toolkit", "hrg"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML config file; command-line flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  auto* p_opt = app.add_option("--p", c.p, "prime p")->capture_default_str();
  auto* d_opt = app.add_option("--d", c.d, "dimension d")->capture_default_str();
  app.add_option("--l", c.l, "RG step exponent, L = p^l")->capture_default_str();
  app.add_option("--eps", c.eps, "epsilon, [phi] = (d - eps)/4")->capture_default_str();
  app.add_option("--S", c.S, "window top layer")->capture_default_str();
  app.add_option("--grid-n", c.grid_n, "field grid nodes (odd)")->capture_default_str();
  app.add_option("--phi-max", c.phi_max, "field grid half-width")->capture_default_str();
  app.add_option("--backend", c.backend, "block expectation backend: fourier or mc")->capture_default_str();
  app.add_option("--mc-samples", c.mc_samples, "samples of the mc backend")->capture_default_str();
  app.add_option("--seed", c.seed, "rng seed")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads (0: HRG_THREADS or 1)")->capture_default_str();
  app.add_option("--g", c.g, "quartic coupling")->capture_default_str();
  app.add_option("--mu", c.mu, "quadratic coupling")->capture_default_str();
  app.add_option("--out", c.out, "output file (default stdout)");

  auto* fixpoint = app.add_subcommand("fixpoint", "non-Gaussian fixed point as JSON");
  fixpoint->add_option("--rep", c.rep, "grid or poly")->capture_default_str();
  fixpoint->add_option("--order", c.order, "Wick order of the poly representation")->capture_default_str();

  auto* exponents = app.add_subcommand("exponents", "[phi], lambda2, [phi^2], eta2 table");
  exponents->add_option("--eps", c.eps_list, "one or more epsilon values");

  auto* tune = app.add_subcommand("tune", "critical mass by bisection");
  tune->add_option("--g", c.tune_g, "quartic coupling (default: g at the fixed point)");
  tune->add_option("--horizon", c.horizon, "RG steps per classification")->capture_default_str();
  tune->add_option("--tol", c.tolerance, "bracket width")->capture_default_str();
  tune->add_option("--mu-lo", c.mu_lo)->capture_default_str();
  tune->add_option("--mu-hi", c.mu_hi)->capture_default_str();
  tune->add_option("--line", c.line, "bare quartic line or the line through the fixed point")->capture_default_str();

  auto* flow_cmd = app.add_subcommand("flow", "RG trajectory CSV");
  flow_cmd->add_option("--steps", c.steps)->capture_default_str();

  auto* correlate = app.add_subcommand("correlate", "exact window correlations CSV");
  correlate->add_option("--pairs", c.pairs_file, "file of leaf pairs (index or k:[..] address)");
  correlate->add_option("--couplings", c.couplings_file, "file of 'leaf g mu' overrides");
  correlate->add_option("--root", c.root, "gaussian or pinned")->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Metropolis estimates CSV and diagnostics JSON");
  sample->add_option("--pairs", c.pairs_file);
  sample->add_option("--couplings", c.couplings_file);
  sample->add_option("--chains", c.chains)->capture_default_str();
  sample->add_option("--sweeps", c.sweeps)->capture_default_str();
  sample->add_option("--burn-in", c.burn_in)->capture_default_str();
  sample->add_option("--diag", c.diag_file, "diagnostics JSON path (default stderr)");

  auto* conformal = app.add_subcommand("conformal-check", "seeded checks of the exact conformal identities");
  conformal->add_option("--trials", c.trials)->capture_default_str();
  conformal->add_option("--word", c.word, "fixed word, e.g. \"T(1,4);S(-1);J;N\"");
  conformal->add_option("--word-length", c.word_length)->capture_default_str();

  auto* os = app.add_subcommand("os-check", "reflection positivity Gram matrix");
  os->add_option("--cutoff", c.cutoff, "UV cutoff layer r");
  os->add_option("--search", c.search, "random witness search trials (cutoff only)")->capture_default_str();
  os->add_option("--max-fns", c.max_fns, "functions per witness candidate")->capture_default_str();
  os->add_option("--fixture", c.fixture, "witness JSON: written by --search, read otherwise");

  auto* agm = app.add_subcommand("agm", "Gauss AGM invariance table");
  agm->add_option("A", c.agm_a)->required();
  agm->add_option("B", c.agm_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, x;
    const int code = app.exit(e, o, x);
    out << o.str();
    err << x.str();
    return code == 0 ? kExitOk : kExitValidation;
  }
  c.p_given = p_opt->count() > 0;
  c.d_given = d_opt->count() > 0;

  try {
    validate(c);
    if (c.threads > 0) set_thread_count(c.threads);
    if (*fixpoint) return cmd_fixpoint(c, out);
    if (*exponents) return cmd_exponents(c, out);
    if (*tune) return cmd_tune(c, out);
    if (*flow_cmd) return cmd_flow(c, out);
    if (*correlate) return cmd_correlate(c, out);
    if (*sample) return cmd_sample(c, out, err);
    if (*conformal) return cmd_conformal(c, out);
    if (*os) return cmd_os(c, out);
    if (*agm) return cmd_agm(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace hrg

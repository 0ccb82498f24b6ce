#include "hrg/tree.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "hrg/error.hpp"
#include "hrg/model.hpp"

namespace hrg {

std::string BallAddress::to_string() const {
  std::ostringstream os;
  os << k << ":[";
  for (std::size_t i = 0; i < path.size(); ++i) os << (i ? "," : "") << path[i];
  os << "]";
  return os.str();
}

BallAddress BallAddress::parse(const std::string& text) {
  static const std::regex re(R"(^\s*(-?\d+)\s*:\s*\[([\d,\s]*)\]\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("malformed ball address: '" + text + "'");
  BallAddress b;
  b.k = std::stoi(m[1]);
  std::string body = m[2];
  std::replace(body.begin(), body.end(), ',', ' ');
  std::istringstream is(body);
  for (int v; is >> v;) b.path.push_back(v);
  return b;
}

Window::Window(int p, int d, int S) : p_(p), d_(d), s_(S), b_(static_cast<int>(ipow(p, d))) {
  if (p < 2) throw ConfigError("p must be at least 2");
  if (d < 1) throw ConfigError("d must be at least 1");
  if (S < 1) throw ConfigError("window top layer S must be at least 1");
  if (static_cast<double>(S) * d * std::log2(static_cast<double>(p)) > 40)
    throw ConfigError("window too large");
}

std::int64_t Window::leaf_count() const { return ipow(b_, s_); }

std::int64_t Window::layer_size(int k) const { return ipow(b_, s_ - k); }

std::int64_t Window::vertex_count() const {
  std::int64_t n = 0;
  for (int k = 0; k <= s_; ++k) n += layer_size(k);
  return n;
}

bool Window::contains(const PAdicPoint& x) const {
  if (x.prime() != p_ || x.dim() != d_) throw ConfigError("point does not match the window's p and d");
  const PNorm n = x.norm();
  return n.zero || n.exp <= s_;
}

BallAddress Window::ball_of(const PAdicPoint& x, int k) const {
  if (!contains(x)) throw DomainError("point outside the window");
  if (k < 0 || k > s_) throw DomainError("layer outside the window");
  BallAddress u{k, {}};
  for (int layer = s_; layer > k; --layer) {
    int label = 0, unit = 1;
    for (int c = 0; c < d_; ++c, unit *= p_) label += x[c].digit(-layer) * unit;
    u.path.push_back(label);
  }
  return u;
}

void Window::validate(const BallAddress& u) const {
  if (u.k < 0 || u.k > s_ || static_cast<int>(u.path.size()) != s_ - u.k)
    throw DomainError("ball address " + u.to_string() + " is not a window vertex");
  for (int a : u.path)
    if (a < 0 || a >= b_) throw DomainError("ball address label out of range");
}

BallAddress Window::parent(const BallAddress& u) const {
  if (u.k >= s_) throw DomainError("the root has no parent inside the window");
  BallAddress q = u;
  q.k += 1;
  q.path.pop_back();
  return q;
}

std::vector<BallAddress> Window::children(const BallAddress& u) const {
  if (u.k <= 0) throw DomainError("unit balls have no children inside the window");
  std::vector<BallAddress> out;
  for (int a = 0; a < b_; ++a) {
    BallAddress c = u;
    c.k -= 1;
    c.path.push_back(a);
    out.push_back(std::move(c));
  }
  return out;
}

BallAddress Window::ancestor(const BallAddress& u, int k) const {
  if (k < u.k || k > s_) throw DomainError("ancestor layer out of range");
  BallAddress q{k, std::vector<int>(u.path.begin(), u.path.begin() + (s_ - k))};
  return q;
}

bool Window::contains(const BallAddress& outer, const BallAddress& inner) const {
  if (outer.k < inner.k) return false;
  return std::equal(outer.path.begin(), outer.path.end(), inner.path.begin());
}

bool Window::disjoint(const BallAddress& a, const BallAddress& b) const {
  return !contains(a, b) && !contains(b, a);
}

int Window::join_layer(const BallAddress& a, const BallAddress& b) const {
  std::size_t cp = 0;
  while (cp < a.path.size() && cp < b.path.size() && a.path[cp] == b.path[cp]) ++cp;
  return s_ - static_cast<int>(cp);
}

std::int64_t Window::index(const BallAddress& u) const {
  std::int64_t i = 0;
  for (int a : u.path) i = i * b_ + a;
  return i;
}

BallAddress Window::address(int k, std::int64_t index) const {
  BallAddress u{k, std::vector<int>(s_ - k)};
  for (int i = s_ - k - 1; i >= 0; --i) {
    u.path[i] = static_cast<int>(index % b_);
    index /= b_;
  }
  return u;
}

PAdicPoint Window::center(const BallAddress& u, int precision) const {
  validate(u);
  precision = std::max(precision, s_);
  std::vector<std::vector<int>> digits(d_, std::vector<int>(precision, 0));
  for (std::size_t i = 0; i < u.path.size(); ++i) {
    int label = u.path[i];
    for (int c = 0; c < d_; ++c) {
      digits[c][i] = label % p_;  // position -S + i
      label /= p_;
    }
  }
  std::vector<PAdicScalar> coords;
  for (int c = 0; c < d_; ++c) {
    coords.push_back(PAdicScalar::from_digits(p_, -s_, digits[c], precision));
  }
  return PAdicPoint(std::move(coords));
}

double ball_volume(int p, int d, int k) { return std::pow(static_cast<double>(p), static_cast<double>(k) * d); }

void check_disjoint(const Window& w, const BallFunction& f) {
  for (std::size_t i = 0; i < f.terms.size(); ++i) {
    w.validate(f.terms[i].first);
    for (std::size_t j = i + 1; j < f.terms.size(); ++j)
      if (!w.disjoint(f.terms[i].first, f.terms[j].first))
        throw DomainError("overlapping balls " + f.terms[i].first.to_string() + " and " +
                          f.terms[j].first.to_string());
  }
}

double integrate(const Window& w, const BallFunction& f) {
  check_disjoint(w, f);
  double s = 0.0;
  for (const auto& [ball, coef] : f.terms) s += coef * ball_volume(w.p(), w.d(), ball.k);
  return s;
}

namespace {

struct Edge {
  std::string key;  // identifies the lower ball of the edge
  int dir;          // +1 upward, -1 downward
};

int count_shared(const std::vector<Edge>& g1, const std::vector<Edge>& g2) {
  std::unordered_map<std::string, int> index;
  for (const auto& e : g1) index[e.key] += e.dir;
  int delta = 0;
  for (const auto& e : g2) {
    auto it = index.find(e.key);
    if (it != index.end()) delta += it->second * e.dir;
  }
  return delta;
}

}  // namespace

int path_overlap_delta(const ExtPoint& x1, const ExtPoint& x2, const ExtPoint& x3, const ExtPoint& x4) {
  const std::vector<const ExtPoint*> pts{&x1, &x2, &x3, &x4};
  std::vector<const PAdicPoint*> finite;
  for (auto* q : pts)
    if (q->has_value()) finite.push_back(&**q);
  if (finite.size() < 3) throw DomainError("at most one endpoint may be infinity");
  int m_min = INT_MAX, m_max = INT_MIN, lowest = INT_MAX;
  for (std::size_t i = 0; i < finite.size(); ++i) {
    if (!finite[i]->is_zero()) lowest = std::min(lowest, finite[i]->valuation());
    for (std::size_t j = i + 1; j < finite.size(); ++j) {
      const PNorm dist = distance(*finite[i], *finite[j]);
      if (dist.zero) throw DomainError("coincident endpoints");
      m_min = std::min(m_min, dist.exp);
      m_max = std::max(m_max, dist.exp);
    }
  }
  const int k_low = m_min - 1, k_high = m_max + 1;
  lowest = std::min(lowest, -k_high);
  const int d = finite.front()->dim();

  auto key = [&](const PAdicPoint& x, int k) {
    std::string s = std::to_string(k) + ":";
    for (int c = 0; c < d; ++c) {
      for (int pos = lowest; pos < -k; ++pos) s += std::to_string(x[c].digit(pos)) + ",";
      s += "|";
    }
    return s;
  };
  auto geodesic = [&](const ExtPoint& u, const ExtPoint& w) {
    std::vector<Edge> g;
    const int top = (u && w) ? distance(*u, *w).exp : k_high;
    if (u)
      for (int k = k_low; k < top; ++k) g.push_back({key(*u, k), +1});
    if (w)
      for (int k = top - 1; k >= k_low; --k) g.push_back({key(*w, k), -1});
    return g;
  };
  return count_shared(geodesic(x1, x2), geodesic(x3, x4));
}

int path_overlap_delta(const Window& w, const ExtPoint& x1, const ExtPoint& x2, const ExtPoint& x3,
                       const ExtPoint& x4) {
  auto leaf = [&](const ExtPoint& x) -> std::optional<BallAddress> {
    if (!x) return std::nullopt;
    return w.ball_of(*x, 0);
  };
  auto geodesic = [&](const ExtPoint& a, const ExtPoint& b) {
    const auto u = leaf(a), v = leaf(b);
    if (!u && !v) throw DomainError("geodesic between infinity and itself");
    if (u && v && *u == *v) throw DomainError("coincident endpoints");
    const int top = (u && v) ? w.join_layer(*u, *v) : w.S();
    std::vector<Edge> g;
    auto edge_key = [&](const BallAddress& leaf_ball, int k) {
      return std::to_string(k) + ":" + std::to_string(w.index(w.ancestor(leaf_ball, k)));
    };
    if (u)
      for (int k = 0; k < top; ++k) g.push_back({edge_key(*u, k), +1});
    if (v)
      for (int k = top - 1; k >= 0; --k) g.push_back({edge_key(*v, k), -1});
    return g;
  };
  return count_shared(geodesic(x1, x2), geodesic(x3, x4));
}

}  // namespace hrg

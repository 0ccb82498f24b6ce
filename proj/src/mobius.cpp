#include "hrg/mobius.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>

#include "hrg/error.hpp"

namespace hrg {

std::string Generator::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kTranslate:
      os << "T" << shift.to_string();
      break;
    case Kind::kScale:
      os << "S(" << m << ")";
      break;
    case Kind::kInvert:
      os << "J";
      break;
    case Kind::kNegate:
      os << "N";
      break;
    case Kind::kPermute:
      os << "P(";
      for (std::size_t i = 0; i < perm.size(); ++i) os << (i ? "," : "") << perm[i];
      os << ")";
      break;
  }
  return os.str();
}

namespace {

std::vector<long long> parse_ints(const std::string& body) {
  std::vector<long long> out;
  std::string s = body;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("not an integer: '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

MobiusWord MobiusWord::parse(const std::string& text, int p, int d, int precision) {
  MobiusWord w(p, d);
  static const std::regex item(R"(^\s*([TSJNP])\s*(?:\(([^)]*)\))?\s*$)");
  std::istringstream is(text);
  std::string part;
  while (std::getline(is, part, ';')) {
    if (part.find_first_not_of(" \t") == std::string::npos) continue;
    std::smatch m;
    if (!std::regex_match(part, m, item)) throw ConfigError("malformed generator: '" + part + "'");
    const char g = m[1].str()[0];
    const bool has_args = m[2].matched;
    const std::vector<long long> args = has_args ? parse_ints(m[2]) : std::vector<long long>{};
    switch (g) {
      case 'T':
        if (static_cast<int>(args.size()) != d) throw ConfigError("T needs d integer coordinates: '" + part + "'");
        w.translate(PAdicPoint::from_ints(p, args, precision));
        break;
      case 'S':
        if (args.size() != 1) throw ConfigError("S needs one integer exponent: '" + part + "'");
        w.scale(static_cast<int>(args[0]));
        break;
      case 'J':
      case 'N':
        if (has_args) throw ConfigError("generator takes no arguments: '" + part + "'");
        g == 'J' ? w.invert() : w.negate();
        break;
      case 'P':
        w.permute(std::vector<int>(args.begin(), args.end()));
        break;
    }
  }
  return w;
}

MobiusWord& MobiusWord::translate(const PAdicPoint& a) {
  if (a.prime() != p_ || a.dim() != d_) throw ConfigError("translation does not match p and d");
  Generator g;
  g.kind = Generator::Kind::kTranslate;
  g.shift = a;
  gens_.push_back(std::move(g));
  return *this;
}

MobiusWord& MobiusWord::scale(int m) {
  Generator g;
  g.kind = Generator::Kind::kScale;
  g.m = m;
  gens_.push_back(std::move(g));
  return *this;
}

MobiusWord& MobiusWord::invert() {
  gens_.push_back(Generator{});
  return *this;
}

MobiusWord& MobiusWord::negate() {
  Generator g;
  g.kind = Generator::Kind::kNegate;
  gens_.push_back(std::move(g));
  return *this;
}

MobiusWord& MobiusWord::permute(const std::vector<int>& perm) {
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> ident(d_);
  std::iota(ident.begin(), ident.end(), 0);
  if (sorted != ident) throw ConfigError("P needs a permutation of 0..d-1");
  Generator g;
  g.kind = Generator::Kind::kPermute;
  g.perm = perm;
  gens_.push_back(std::move(g));
  return *this;
}

MobiusWord MobiusWord::then(const MobiusWord& other) const {
  if (other.p_ != p_ || other.d_ != d_) throw ConfigError("incompatible words");
  MobiusWord w = *this;
  w.gens_.insert(w.gens_.end(), other.gens_.begin(), other.gens_.end());
  return w;
}

ExtPoint invert(const ExtPoint& x) {
  if (!x) throw DomainError("invert(infinity) needs p and d; use a MobiusWord");
  if (x->is_zero()) {
    for (const auto& c : x->coords())
      if (!c.is_exact_zero()) throw PrecisionError("cannot invert a value known only to be zero modulo p^N");
    return std::nullopt;
  }
  return shift(*x, -2 * x->valuation());
}

ExtPoint apply(const Generator& g, const ExtPoint& x) {
  using K = Generator::Kind;
  if (g.kind == K::kInvert) return invert(x);
  if (!x) return x;
  switch (g.kind) {
    case K::kTranslate:
      return add(*x, g.shift);
    case K::kScale:
      return shift(*x, g.m);
    case K::kNegate:
      return neg(*x);
    case K::kPermute: {
      std::vector<PAdicScalar> c;
      for (int i : g.perm) c.push_back((*x)[i]);
      return PAdicPoint(std::move(c));
    }
    default:
      return x;
  }
}

ExtPoint MobiusWord::apply(const ExtPoint& x) const {
  ExtPoint y = x;
  for (const auto& g : gens_) {
    if (g.kind == Generator::Kind::kInvert && !y) {
      y = PAdicPoint::origin(p_, d_);
      continue;
    }
    y = hrg::apply(g, y);
  }
  return y;
}

int MobiusWord::jacobian_exponent(const PAdicPoint& x) const {
  ExtPoint y = x;
  int e = 0;
  for (const auto& g : gens_) {
    if (!y) throw DomainError("jacobian at a pole of the word");
    switch (g.kind) {
      case Generator::Kind::kScale:
        e -= g.m * d_;
        break;
      case Generator::Kind::kInvert:
        if (y->is_zero()) throw DomainError("jacobian at a pole of the word");
        e += 2 * d_ * y->valuation();
        break;
      default:
        break;
    }
    y = hrg::apply(g, y);
  }
  if (!y) throw DomainError("jacobian at a pole of the word");
  return e;
}

double MobiusWord::jacobian_factor(const PAdicPoint& x) const {
  return std::pow(static_cast<double>(p_), jacobian_exponent(x));
}

std::string MobiusWord::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < gens_.size(); ++i) {
    if (i) s += ";";
    s += gens_[i].to_string();
  }
  return s;
}

MobiusWord random_word(int p, int d, int length, int radius, std::mt19937_64& rng, int precision) {
  MobiusWord w(p, d);
  std::uniform_int_distribution<int> kind(0, 4), m(-2, 2);
  for (int i = 0; i < length; ++i) {
    switch (kind(rng)) {
      case 0:
        w.translate(random_point(p, d, radius, rng, precision));
        break;
      case 1:
        w.scale(m(rng));
        break;
      case 2:
        w.invert();
        break;
      case 3:
        w.negate();
        break;
      default: {
        std::vector<int> perm(d);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        w.permute(perm);
      }
    }
  }
  return w;
}

int cross_ratio_exponent(const ExtPoint& x1, const ExtPoint& x2, const ExtPoint& x3, const ExtPoint& x4) {
  const ExtPoint* pts[4] = {&x1, &x2, &x3, &x4};
  int infinities = 0;
  for (auto* q : pts) infinities += !q->has_value();
  if (infinities > 1) throw DomainError("coincident points (infinity repeated)");
  auto k = [&](int i, int j, bool check_only) -> int {
    const ExtPoint& a = *pts[i];
    const ExtPoint& b = *pts[j];
    if (!a || !b) return 0;
    const PNorm n = distance(*a, *b);
    if (n.zero) throw DomainError("coincident points");
    return check_only ? 0 : n.exp;
  };
  k(0, 1, true);
  k(2, 3, true);
  return k(0, 2, false) + k(1, 3, false) - k(0, 3, false) - k(1, 2, false);
}

double cross_ratio(const ExtPoint& x1, const ExtPoint& x2, const ExtPoint& x3, const ExtPoint& x4) {
  const int p = (x1 ? x1 : x2)->prime();
  return std::pow(static_cast<double>(p), cross_ratio_exponent(x1, x2, x3, x4));
}

bool check_mmd(const ExtPoint& x1, const ExtPoint& x2, const ExtPoint& x3, const ExtPoint& x4,
               const Window& w) {
  const ExtPoint* pts[4] = {&x1, &x2, &x3, &x4};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (*pts[i] && *pts[j] && w.ball_of(**pts[i], 0) == w.ball_of(**pts[j], 0))
        throw DomainError("two points share a unit ball; the window does not resolve the quadruple");
  return cross_ratio_exponent(x1, x2, x3, x4) == -path_overlap_delta(w, x1, x2, x3, x4);
}

bool check_inversion_identity(const PAdicPoint& x, const PAdicPoint& y) {
  if (x.is_zero() || y.is_zero()) throw DomainError("inversion identity needs nonzero points");
  const PNorm dxy = distance(x, y);
  if (dxy.zero) throw DomainError("inversion identity needs x != y");
  const PNorm lhs = distance(*invert(x), *invert(y));
  return !lhs.zero && lhs.exp == dxy.exp - x.norm().exp - y.norm().exp;
}

PAdicPoint reflect(const PAdicPoint& x) {
  std::vector<PAdicScalar> c = x.coords();
  c[0] = neg(c[0]);
  return PAdicPoint(std::move(c));
}

int sign(const PAdicPoint& x) {
  const int p = x.prime();
  if (p == 2) throw ConfigError("the half-space sign is only defined for odd p");
  const PAdicScalar& x1 = x[0];
  if (x1.is_zero()) return 0;
  return x1.digits().front() <= (p - 1) / 2 ? 1 : -1;
}

}  // namespace hrg

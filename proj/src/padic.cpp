#include "hrg/padic.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "hrg/error.hpp"

namespace hrg {

namespace {

constexpr int kExactPrecision = INT_MAX / 4;

void check_prime(int p) {
  if (p < 2) throw ConfigError("p must be at least 2");
}

}  // namespace

double PNorm::value(int p) const { return zero ? 0.0 : std::pow(static_cast<double>(p), exp); }

PNorm max(const PNorm& a, const PNorm& b) { return a < b ? b : a; }

PAdicScalar::PAdicScalar(int p, int precision) : p_(p), w_(precision), v_(kExactPrecision), exact_(true) {
  check_prime(p);
  if (precision < 1) throw ConfigError("precision must be positive");
}

PAdicScalar PAdicScalar::zero_mod(int p, int abs_precision, int precision) {
  PAdicScalar z(p, precision);
  z.v_ = abs_precision;
  z.exact_ = false;
  return z;
}

PAdicScalar PAdicScalar::normalized(int p, int w, int lo, int hi, std::vector<int> raw) {
  std::size_t first = 0;
  while (first < raw.size() && raw[first] == 0) ++first;
  if (first == raw.size()) return zero_mod(p, hi, w);
  PAdicScalar s(p, w);
  s.exact_ = false;
  s.v_ = lo + static_cast<int>(first);
  const std::size_t len = std::min<std::size_t>(raw.size() - first, static_cast<std::size_t>(w));
  s.digits_.assign(raw.begin() + first, raw.begin() + first + len);
  return s;
}

PAdicScalar PAdicScalar::from_digits(int p, int v, const std::vector<int>& digits, int precision) {
  check_prime(p);
  for (int a : digits)
    if (a < 0 || a >= p) throw ConfigError("digit out of range [0, p-1]");
  if (digits.empty()) return zero_mod(p, v, precision);
  return normalized(p, precision, v, v + static_cast<int>(digits.size()), digits);
}

PAdicScalar PAdicScalar::from_int(int p, long long n, int precision) {
  check_prime(p);
  if (n == 0) return PAdicScalar(p, precision);
  if (n < 0) return neg(from_int(p, -n, precision));
  int v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  std::vector<int> d;
  while (n > 0 && static_cast<int>(d.size()) < precision) {
    d.push_back(static_cast<int>(n % p));
    n /= p;
  }
  d.resize(precision, 0);
  return from_digits(p, v, d, precision);
}

int PAdicScalar::valuation() const {
  if (is_zero()) throw DomainError("valuation of zero");
  return v_;
}

int PAdicScalar::abs_precision() const {
  if (is_exact_zero()) return INT_MAX;
  return is_zero() ? v_ : v_ + static_cast<int>(digits_.size());
}

int PAdicScalar::digit(int pos) const {
  if (is_exact_zero()) return 0;
  if (pos >= abs_precision())
    throw PrecisionError("digit at position " + std::to_string(pos) + " is beyond the known precision");
  if (is_zero() || pos < v_) return 0;
  return digits_[pos - v_];
}

PNorm PAdicScalar::norm() const { return is_zero() ? PNorm::nil() : PNorm::power(-v_); }

std::string PAdicScalar::to_string() const {
  std::ostringstream os;
  if (is_exact_zero()) {
    os << p_ << "^inf * ()";
    return os.str();
  }
  os << p_ << "^" << v_ << " * (";
  for (std::size_t i = 0; i < digits_.size(); ++i) os << (i ? " " : "") << digits_[i];
  os << ")";
  return os.str();
}

PAdicScalar PAdicScalar::parse(const std::string& text, int precision) {
  static const std::regex re(R"(^\s*(\d+)\s*\^\s*(-?\d+|inf)\s*\*\s*\(([\d\s]*)\)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("malformed p-adic scalar: '" + text + "'");
  const int p = std::stoi(m[1]);
  if (m[2] == "inf") return PAdicScalar(p, precision);
  const int v = std::stoi(m[2]);
  std::vector<int> d;
  std::istringstream ds(m[3].str());
  for (int a; ds >> a;) d.push_back(a);
  if (d.empty()) return zero_mod(p, v, precision);
  if (d.front() == 0) throw ConfigError("leading digit must be nonzero: '" + text + "'");
  return from_digits(p, v, d, precision);
}

PAdicScalar add(const PAdicScalar& x, const PAdicScalar& y) {
  if (x.p_ != y.p_) throw ConfigError("incompatible primes");
  const int w = std::min(x.w_, y.w_);
  if (x.is_exact_zero() && y.is_exact_zero()) return PAdicScalar(x.p_, w);
  if (x.is_exact_zero() || y.is_exact_zero()) {
    PAdicScalar r = x.is_exact_zero() ? y : x;
    r.w_ = w;
    if (static_cast<int>(r.digits_.size()) > w) r.digits_.resize(w);
    return r;
  }
  const int hi = std::min(x.abs_precision(), y.abs_precision());
  const int lo = std::min(x.is_zero() ? hi : x.v_, y.is_zero() ? hi : y.v_);
  if (lo >= hi) return PAdicScalar::zero_mod(x.p_, hi, w);
  std::vector<int> raw(hi - lo);
  int carry = 0;
  for (int pos = lo; pos < hi; ++pos) {
    const int s = x.digit(pos) + y.digit(pos) + carry;
    raw[pos - lo] = s % x.p_;
    carry = s / x.p_;
  }
  return PAdicScalar::normalized(x.p_, w, lo, hi, std::move(raw));
}

PAdicScalar neg(const PAdicScalar& x) {
  if (x.is_zero()) return x;
  PAdicScalar r = x;
  r.digits_[0] = x.p_ - x.digits_[0];
  for (std::size_t i = 1; i < r.digits_.size(); ++i) r.digits_[i] = x.p_ - 1 - x.digits_[i];
  return r;
}

PAdicScalar sub(const PAdicScalar& x, const PAdicScalar& y) { return add(x, neg(y)); }

PAdicScalar mul(const PAdicScalar& x, const PAdicScalar& y) {
  if (x.p_ != y.p_) throw ConfigError("incompatible primes");
  const int w = std::min(x.w_, y.w_);
  if (x.is_exact_zero() || y.is_exact_zero()) return PAdicScalar(x.p_, w);
  // For a zero v_ is its precision bound, otherwise the valuation.
  if (x.is_zero() || y.is_zero()) return PAdicScalar::zero_mod(x.p_, x.v_ + y.v_, w);
  const int n = static_cast<int>(std::min(x.digits_.size(), y.digits_.size()));
  std::vector<long long> acc(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; i + j < n; ++j) acc[i + j] += static_cast<long long>(x.digits_[i]) * y.digits_[j];
  std::vector<int> raw(n);
  long long carry = 0;
  for (int k = 0; k < n; ++k) {
    const long long s = acc[k] + carry;
    raw[k] = static_cast<int>(s % x.p_);
    carry = s / x.p_;
  }
  const int v = x.v_ + y.v_;
  return PAdicScalar::normalized(x.p_, w, v, v + n, std::move(raw));
}

PAdicScalar shift(const PAdicScalar& x, int m) {
  if (x.is_exact_zero()) return x;
  PAdicScalar r = x;
  r.v_ += m;
  return r;
}

bool same(const PAdicScalar& x, const PAdicScalar& y) { return sub(x, y).is_zero(); }

PAdicPoint::PAdicPoint(std::vector<PAdicScalar> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw ConfigError("point needs at least one coordinate");
  for (const auto& c : coords_)
    if (c.prime() != coords_.front().prime()) throw ConfigError("incompatible primes");
}

PAdicPoint PAdicPoint::origin(int p, int d, int precision) {
  return PAdicPoint(std::vector<PAdicScalar>(d, PAdicScalar(p, precision)));
}

PAdicPoint PAdicPoint::from_ints(int p, const std::vector<long long>& xs, int precision) {
  std::vector<PAdicScalar> c;
  for (long long x : xs) c.push_back(PAdicScalar::from_int(p, x, precision));
  return PAdicPoint(std::move(c));
}

bool PAdicPoint::is_zero() const {
  return std::all_of(coords_.begin(), coords_.end(), [](const PAdicScalar& c) { return c.is_zero(); });
}

PNorm PAdicPoint::norm() const {
  PNorm n = PNorm::nil();
  for (const auto& c : coords_) n = max(n, c.norm());
  return n;
}

int PAdicPoint::valuation() const {
  const PNorm n = norm();
  if (n.zero) throw DomainError("valuation of zero");
  return -n.exp;
}

std::string PAdicPoint::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < coords_.size(); ++i) s += (i ? ", " : "") + coords_[i].to_string();
  return s + "]";
}

namespace {

template <class Op>
PAdicPoint zip(const PAdicPoint& x, const PAdicPoint& y, Op op) {
  if (x.dim() != y.dim()) throw ConfigError("dimension mismatch");
  std::vector<PAdicScalar> c;
  for (int i = 0; i < x.dim(); ++i) c.push_back(op(x[i], y[i]));
  return PAdicPoint(std::move(c));
}

}  // namespace

PAdicPoint add(const PAdicPoint& x, const PAdicPoint& y) {
  return zip(x, y, [](const PAdicScalar& a, const PAdicScalar& b) { return add(a, b); });
}

PAdicPoint sub(const PAdicPoint& x, const PAdicPoint& y) {
  return zip(x, y, [](const PAdicScalar& a, const PAdicScalar& b) { return sub(a, b); });
}

PAdicPoint neg(const PAdicPoint& x) {
  std::vector<PAdicScalar> c;
  for (const auto& a : x.coords()) c.push_back(neg(a));
  return PAdicPoint(std::move(c));
}

PAdicPoint shift(const PAdicPoint& x, int m) {
  std::vector<PAdicScalar> c;
  for (const auto& a : x.coords()) c.push_back(shift(a, m));
  return PAdicPoint(std::move(c));
}

PAdicPoint scale(const PAdicScalar& k, const PAdicPoint& x) {
  std::vector<PAdicScalar> c;
  for (const auto& a : x.coords()) c.push_back(mul(k, a));
  return PAdicPoint(std::move(c));
}

PNorm norm(const PAdicPoint& x) { return x.norm(); }

PNorm distance(const PAdicPoint& x, const PAdicPoint& y) { return sub(x, y).norm(); }

bool same(const PAdicPoint& x, const PAdicPoint& y) { return sub(x, y).is_zero(); }

PAdicPoint random_point(int p, int d, int radius_exp, std::mt19937_64& rng, int precision) {
  std::uniform_int_distribution<int> digit(0, p - 1);
  std::vector<PAdicScalar> c;
  for (int i = 0; i < d; ++i) {
    std::vector<int> ds(precision);
    for (auto& a : ds) a = digit(rng);
    c.push_back(PAdicScalar::from_digits(p, -radius_exp, ds, precision));
  }
  return PAdicPoint(std::move(c));
}

}  // namespace hrg

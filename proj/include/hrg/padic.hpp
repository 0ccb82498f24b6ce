#pragma once

#include <climits>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hrg {

// |x| as an exact power of p, or zero.
struct PNorm {
  bool zero = true;
  int exp = 0;  // |x| = p^exp when !zero

  static PNorm power(int e) { return PNorm{false, e}; }
  static PNorm nil() { return PNorm{}; }
  double value(int p) const;
  bool operator==(const PNorm& o) const { return zero == o.zero && (zero || exp == o.exp); }
  bool operator<(const PNorm& o) const {
    if (zero) return !o.zero;
    return !o.zero && exp < o.exp;
  }
  bool operator<=(const PNorm& o) const { return *this < o || *this == o; }
};

PNorm max(const PNorm& a, const PNorm& b);

// Element of Q_p with capped relative precision: the value is known modulo
// p^abs_precision(). A zero is either exact or "zero modulo p^N".
class PAdicScalar {
 public:
  static constexpr int kDefaultPrecision = 32;

  PAdicScalar() = default;
  // Exact zero.
  explicit PAdicScalar(int p, int precision = kDefaultPrecision);

  static PAdicScalar from_int(int p, long long n, int precision = kDefaultPrecision);
  // sum_i digits[i] p^(v + i), known modulo p^(v + digits.size()).
  static PAdicScalar from_digits(int p, int v, const std::vector<int>& digits,
                                 int precision = kDefaultPrecision);
  static PAdicScalar zero_mod(int p, int abs_precision, int precision = kDefaultPrecision);
  static PAdicScalar parse(const std::string& text, int precision = kDefaultPrecision);

  int prime() const { return p_; }
  int precision() const { return w_; }
  bool is_zero() const { return digits_.empty(); }
  bool is_exact_zero() const { return digits_.empty() && exact_; }
  int valuation() const;  // throws for zero
  int abs_precision() const;  // INT_MAX for an exact zero
  const std::vector<int>& digits() const { return digits_; }
  // Digit at absolute position `pos` (0 below the valuation). Throws
  // PrecisionError when pos is not known.
  int digit(int pos) const;
  PNorm norm() const;

  std::string to_string() const;

  friend PAdicScalar add(const PAdicScalar& x, const PAdicScalar& y);
  friend PAdicScalar neg(const PAdicScalar& x);
  friend PAdicScalar mul(const PAdicScalar& x, const PAdicScalar& y);
  friend PAdicScalar shift(const PAdicScalar& x, int m);

 private:
  static PAdicScalar normalized(int p, int w, int lo, int hi, std::vector<int> raw);

  int p_ = 2;
  int w_ = kDefaultPrecision;
  int v_ = 0;               // valuation, or abs precision of a zero
  bool exact_ = true;       // only meaningful for zero
  std::vector<int> digits_;  // digits_[0] != 0 when non-empty
};

PAdicScalar add(const PAdicScalar& x, const PAdicScalar& y);
PAdicScalar neg(const PAdicScalar& x);
PAdicScalar sub(const PAdicScalar& x, const PAdicScalar& y);
PAdicScalar mul(const PAdicScalar& x, const PAdicScalar& y);
// x * p^m.
PAdicScalar shift(const PAdicScalar& x, int m);
// Equal within the precision both values carry.
bool same(const PAdicScalar& x, const PAdicScalar& y);

// Element of Q_p^d; all coordinates share p and the precision cap.
class PAdicPoint {
 public:
  PAdicPoint() = default;
  explicit PAdicPoint(std::vector<PAdicScalar> coords);
  static PAdicPoint origin(int p, int d, int precision = PAdicScalar::kDefaultPrecision);
  static PAdicPoint from_ints(int p, const std::vector<long long>& xs,
                              int precision = PAdicScalar::kDefaultPrecision);

  int prime() const { return coords_.front().prime(); }
  int dim() const { return static_cast<int>(coords_.size()); }
  int precision() const { return coords_.front().precision(); }
  const PAdicScalar& operator[](int i) const { return coords_[i]; }
  const std::vector<PAdicScalar>& coords() const { return coords_; }
  bool is_zero() const;
  PNorm norm() const;
  // min coordinate valuation; throws for zero
  int valuation() const;
  std::string to_string() const;

 private:
  std::vector<PAdicScalar> coords_;
};

PAdicPoint add(const PAdicPoint& x, const PAdicPoint& y);
PAdicPoint neg(const PAdicPoint& x);
PAdicPoint sub(const PAdicPoint& x, const PAdicPoint& y);
PAdicPoint shift(const PAdicPoint& x, int m);
PAdicPoint scale(const PAdicScalar& c, const PAdicPoint& x);
PNorm norm(const PAdicPoint& x);
PNorm distance(const PAdicPoint& x, const PAdicPoint& y);
bool same(const PAdicPoint& x, const PAdicPoint& y);

// Uniform point of the ball of radius p^radius_exp around 0: i.i.d. digits at
// positions -radius_exp .. -radius_exp + precision - 1.
PAdicPoint random_point(int p, int d, int radius_exp, std::mt19937_64& rng,
                        int precision = PAdicScalar::kDefaultPrecision);

}  // namespace hrg

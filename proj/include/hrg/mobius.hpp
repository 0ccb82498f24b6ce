#pragma once

#include <random>
#include <string>
#include <vector>

#include "hrg/padic.hpp"
#include "hrg/tree.hpp"

namespace hrg {

struct Generator {
  enum class Kind { kTranslate, kScale, kInvert, kNegate, kPermute };
  Kind kind = Kind::kInvert;
  PAdicPoint shift;       // kTranslate
  int m = 0;              // kScale: x -> p^m x
  std::vector<int> perm;  // kPermute: y_i = x_perm[i]

  std::string to_string() const;
};

// A word of generators of the conformal group, applied left to right.
// Text form: generators separated by ';', e.g. "T(1,4);S(-1);J;N;P(1,0)".
class MobiusWord {
 public:
  MobiusWord(int p, int d) : p_(p), d_(d) {}
  static MobiusWord parse(const std::string& text, int p, int d,
                          int precision = PAdicScalar::kDefaultPrecision);

  int p() const { return p_; }
  int d() const { return d_; }
  const std::vector<Generator>& generators() const { return gens_; }

  MobiusWord& translate(const PAdicPoint& a);
  MobiusWord& scale(int m);
  MobiusWord& invert();
  MobiusWord& negate();
  MobiusWord& permute(const std::vector<int>& perm);
  // this followed by other
  MobiusWord then(const MobiusWord& other) const;

  ExtPoint apply(const ExtPoint& x) const;
  // The Radon-Nikodym factor at x is p^jacobian_exponent(x). Throws
  // DomainError when x is sent through infinity.
  int jacobian_exponent(const PAdicPoint& x) const;
  double jacobian_factor(const PAdicPoint& x) const;

  std::string to_string() const;

 private:
  int p_, d_;
  std::vector<Generator> gens_;
};

ExtPoint apply(const Generator& g, const ExtPoint& x);

// Word of `length` random generators; translations are by points of norm at
// most p^radius with `precision` digits.
MobiusWord random_word(int p, int d, int length, int radius, std::mt19937_64& rng,
                       int precision = PAdicScalar::kDefaultPrecision);

// |x|^(-2) x, with 0 <-> infinity.
ExtPoint invert(const ExtPoint& x);

// Exponent e with CR(x1,x2,x3,x4) = |x1-x3||x2-x4| / (|x1-x4||x2-x3|) = p^e.
// Factors containing infinity are omitted.
int cross_ratio_exponent(const ExtPoint& x1, const ExtPoint& x2, const ExtPoint& x3, const ExtPoint& x4);
double cross_ratio(const ExtPoint& x1, const ExtPoint& x2, const ExtPoint& x3, const ExtPoint& x4);

// CR = p^(-delta) with delta counted inside the window. The finite points
// must lie in pairwise distinct unit balls.
bool check_mmd(const ExtPoint& x1, const ExtPoint& x2, const ExtPoint& x3, const ExtPoint& x4,
               const Window& w);
bool check_inversion_identity(const PAdicPoint& x, const PAdicPoint& y);

// Negates the first coordinate.
PAdicPoint reflect(const PAdicPoint& x);
// Side of the reflection hyperplane: leading digit of x_1 in {1..(p-1)/2}
// gives +1. Odd p only.
int sign(const PAdicPoint& x);

}  // namespace hrg

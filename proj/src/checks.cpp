#include "hrg/checks.hpp"

#include <random>

#include "hrg/error.hpp"
#include "hrg/gaussian_field.hpp"

namespace hrg {

namespace {

constexpr int kMaxRedraws = 1000;
constexpr std::size_t kMaxReported = 5;

struct Shape {
  int p, d;
};

Shape draw_shape(const ConformalCheckOptions& opt, std::mt19937_64& rng) {
  static constexpr int primes[] = {2, 3, 5};
  Shape s{primes[std::uniform_int_distribution<int>(0, 2)(rng)], std::uniform_int_distribution<int>(1, 2)(rng)};
  if (opt.p) s.p = *opt.p;
  if (opt.d) s.d = *opt.d;
  return s;
}

PAdicPoint draw_point(const Shape& s, std::mt19937_64& rng) {
  return random_point(s.p, s.d, std::uniform_int_distribution<int>(-2, 3)(rng), rng);
}

MobiusWord draw_word(const ConformalCheckOptions& opt, const Shape& s, std::mt19937_64& rng) {
  if (opt.word) return MobiusWord::parse(*opt.word, s.p, s.d);
  return random_word(s.p, s.d, opt.word_length, 2, rng);
}

std::string show(const ExtPoint& x) { return x ? x->to_string() : "inf"; }

// Runs `trial` until it returns a verdict; DomainError and PrecisionError mean
// the sample is degenerate (pole, coincident points) and is redrawn.
template <class Trial>
IdentityTally tally(const std::string& name, const ConformalCheckOptions& opt, std::uint64_t salt, Trial trial) {
  if (opt.trials < 1) throw ConfigError("trials: must be at least 1");
  if (opt.word && (!opt.p || !opt.d)) throw ConfigError("word: needs fixed p and d");
  IdentityTally t;
  t.name = name;
  std::seed_seq seq{opt.seed, salt};
  std::mt19937_64 rng(seq);
  for (int i = 0; i < opt.trials; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxRedraws) throw NumericError(name + ": could not draw a non-degenerate sample");
      std::string detail;
      try {
        const bool ok = trial(rng, detail);
        ++t.trials;
        if (ok) {
          ++t.passed;
        } else if (t.failures.size() < kMaxReported) {
          t.failures.push_back(detail);
        }
        break;
      } catch (const DomainError&) {
        ++t.redraws;
      } catch (const PrecisionError&) {
        ++t.redraws;
      }
    }
  }
  return t;
}

}  // namespace

IdentityTally cross_ratio_invariance(const ConformalCheckOptions& opt) {
  return tally("cross-ratio invariance", opt, 1, [&](std::mt19937_64& rng, std::string& detail) {
    const Shape s = draw_shape(opt, rng);
    const MobiusWord f = draw_word(opt, s, rng);
    std::vector<ExtPoint> x;
    for (int i = 0; i < 4; ++i) x.push_back(draw_point(s, rng));
    std::vector<ExtPoint> fx;
    for (const auto& q : x) fx.push_back(f.apply(q));
    const int before = cross_ratio_exponent(x[0], x[1], x[2], x[3]);
    const int after = cross_ratio_exponent(fx[0], fx[1], fx[2], fx[3]);
    detail = "word " + f.to_string() + " x1 " + show(x[0]) + " CR exponent " + std::to_string(before) + " -> " +
             std::to_string(after);
    return before == after;
  });
}

IdentityTally mmd_identity(const ConformalCheckOptions& opt) {
  constexpr int kWindowTop = 3;
  return tally("MMD identity", opt, 2, [&](std::mt19937_64& rng, std::string& detail) {
    const Shape s = draw_shape(opt, rng);
    const Window w(s.p, s.d, kWindowTop);
    std::vector<ExtPoint> x;
    for (int i = 0; i < 4; ++i) x.push_back(random_point(s.p, s.d, kWindowTop, rng));
    const int inf = std::uniform_int_distribution<int>(0, 4)(rng);
    if (inf < 4) x[inf] = std::nullopt;
    const bool ok = check_mmd(x[0], x[1], x[2], x[3], w);
    detail = "p " + std::to_string(s.p) + " d " + std::to_string(s.d) + " points " + show(x[0]) + " " + show(x[1]) +
             " " + show(x[2]) + " " + show(x[3]);
    return ok;
  });
}

IdentityTally inversion_identity(const ConformalCheckOptions& opt) {
  return tally("inversion identity", opt, 3, [&](std::mt19937_64& rng, std::string& detail) {
    const Shape s = draw_shape(opt, rng);
    const PAdicPoint x = draw_point(s, rng), y = draw_point(s, rng);
    detail = show(x) + " " + show(y);
    return check_inversion_identity(x, y);
  });
}

IdentityTally gaussian_mobius_covariance(const ConformalCheckOptions& opt) {
  return tally("Gaussian Mobius covariance", opt, 4, [&](std::mt19937_64& rng, std::string& detail) {
    const Shape s = draw_shape(opt, rng);
    ModelParams m{s.p, s.d, opt.eps};
    m.validate();
    const MobiusWord f = draw_word(opt, s, rng);
    const PAdicPoint x = draw_point(s, rng), y = draw_point(s, rng);
    const MobiusCovariance c = mobius_covariance(f, x, y, m);
    detail = "word " + f.to_string() + " exponents " + std::to_string(c.lhs_exponent) + " vs " +
             std::to_string(c.rhs_exponent);
    return c.exact();
  });
}

std::vector<IdentityTally> conformal_checks(const ConformalCheckOptions& opt) {
  return {cross_ratio_invariance(opt), mmd_identity(opt), inversion_identity(opt), gaussian_mobius_covariance(opt)};
}

}  // namespace hrg

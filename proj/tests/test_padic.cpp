#include <doctest.h>

#include <random>

#include "hrg/error.hpp"
#include "hrg/padic.hpp"

using namespace hrg;

namespace {

// Random scalar with valuation in [-4, 4] and full random digits.
PAdicScalar random_scalar(int p, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> val(-4, 4), digit(0, p - 1), lead(1, p - 1);
  std::vector<int> ds(PAdicScalar::kDefaultPrecision);
  for (auto& a : ds) a = digit(rng);
  ds[0] = lead(rng);
  return PAdicScalar::from_digits(p, val(rng), ds);
}

// Base-p digits of a nonnegative integer, the integer arithmetic oracle.
std::vector<int> base_p(long long n, int p) {
  std::vector<int> out;
  while (n > 0) {
    out.push_back(static_cast<int>(n % p));
    n /= p;
  }
  return out;
}

}  // namespace

TEST_CASE("addition with carries matches integer arithmetic") {
  const PAdicScalar s = add(PAdicScalar::from_int(3, 1), PAdicScalar::from_int(3, 2));
  CHECK(s.valuation() == 1);
  CHECK(s.digit(0) == 0);
  CHECK(s.digit(1) == 1);
  const PAdicScalar e = add(PAdicScalar::from_int(5, 4), PAdicScalar::from_int(5, 4));
  CHECK(e.digit(0) == 3);
  CHECK(e.digit(1) == 1);
  CHECK(e.digit(2) == 0);

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long long> n(0, 1000000);
  for (int p : {2, 3, 5, 7}) {
    for (int t = 0; t < 200; ++t) {
      const long long a = n(rng), b = n(rng);
      const PAdicScalar sum = add(PAdicScalar::from_int(p, a), PAdicScalar::from_int(p, b));
      const PAdicScalar prod = mul(PAdicScalar::from_int(p, a), PAdicScalar::from_int(p, b));
      const auto ds = base_p(a + b, p), dp = base_p(a * b, p);
      for (int i = 0; i < 20; ++i) {
        CHECK(sum.digit(i) == (i < static_cast<int>(ds.size()) ? ds[i] : 0));
        CHECK(prod.digit(i) == (i < static_cast<int>(dp.size()) ? dp[i] : 0));
      }
    }
  }
}

TEST_CASE("zero, negation and the group laws") {
  const PAdicScalar zero(3);
  const PAdicScalar x = PAdicScalar::from_int(3, 7);
  CHECK(same(add(x, zero), x));
  CHECK(neg(zero).is_exact_zero());
  const PAdicScalar m1 = neg(PAdicScalar::from_int(3, 1));
  for (int i = 0; i < PAdicScalar::kDefaultPrecision; ++i) CHECK(m1.digit(i) == 2);
  CHECK(add(m1, PAdicScalar::from_int(3, 1)).is_zero());

  std::mt19937_64 rng(5);
  for (int p : {2, 3, 5}) {
    for (int t = 0; t < 100; ++t) {
      const PAdicScalar a = random_scalar(p, rng), b = random_scalar(p, rng), c = random_scalar(p, rng);
      CHECK(neg(a).norm() == a.norm());
      CHECK(add(a, neg(a)).is_zero());
      CHECK(same(add(a, b), add(b, a)));
      CHECK(same(add(add(a, b), c), add(a, add(b, c))));
      CHECK(same(mul(a, b), mul(b, a)));
      CHECK(mul(a, b).norm().exp == a.norm().exp + b.norm().exp);
    }
  }
}

TEST_CASE("norms and distances are exact powers of p") {
  CHECK(PAdicScalar::from_int(2, 2).norm() == PNorm::power(-1));
  CHECK(PAdicScalar::from_int(5, 5).norm() == PNorm::power(-1));
  const PAdicPoint x = PAdicPoint::from_ints(3, {1, 3});
  CHECK(x.norm() == PNorm::power(0));
  const PAdicPoint a = PAdicPoint::from_ints(2, {0}), b = PAdicPoint::from_ints(2, {1});
  CHECK(distance(a, a).zero);
  CHECK(distance(a, b) == PNorm::power(0));
  const PAdicPoint u = PAdicPoint::from_ints(7, {7}), v = PAdicPoint::from_ints(7, {49});
  CHECK(distance(u, v) == PNorm::power(-1));
}

TEST_CASE("strong triangle and isosceles properties on random triples") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> r(-3, 3);
  for (int p : {2, 3, 5}) {
    for (int d : {1, 2}) {
      for (int t = 0; t < 3000; ++t) {
        const PAdicPoint x = random_point(p, d, r(rng), rng), y = random_point(p, d, r(rng), rng),
                         z = random_point(p, d, r(rng), rng);
        const PNorm xy = distance(x, y), yz = distance(y, z), xz = distance(x, z);
        CHECK(xz <= max(xy, yz));
        if (!(xy == yz)) CHECK(xz == max(xy, yz));
      }
    }
  }
}

TEST_CASE("random points are uniform on the ball") {
  // Digit frequencies and sub-ball hit rates against the multinomial law.
  const int p = 3, d = 2, n = 100000;
  std::mt19937_64 rng(2024);
  std::vector<int> freq(p, 0);
  int hits = 0;
  for (int t = 0; t < n; ++t) {
    const PAdicPoint x = random_point(p, d, 2, rng);
    CHECK(x.norm() <= PNorm::power(2));
    ++freq[x[0].digit(-2)];
    if (x[0].digit(-2) == 1 && x[1].digit(-2) == 2) ++hits;
  }
  for (int a = 0; a < p; ++a) {
    const double mean = static_cast<double>(n) / p, sd = std::sqrt(n * (1.0 / p) * (1.0 - 1.0 / p));
    CHECK(std::fabs(freq[a] - mean) < 3.0 * sd);
  }
  const double q = 1.0 / 9.0, sd = std::sqrt(n * q * (1 - q));
  CHECK(std::fabs(hits - n * q) < 3.0 * sd);
}

TEST_CASE("text form round trips") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const PAdicScalar x = random_scalar(5, rng);
    const PAdicScalar y = PAdicScalar::parse(x.to_string());
    CHECK(y.valuation() == x.valuation());
    CHECK(y.digits() == x.digits());
  }
  CHECK(PAdicScalar::parse("3^inf * ()").is_exact_zero());
  CHECK_THROWS_AS(PAdicScalar::parse("3^1 * (0 1)"), ConfigError);
  CHECK_THROWS_AS(PAdicScalar::parse("garbage"), ConfigError);
}

TEST_CASE("precision is reported, not invented") {
  const PAdicScalar x = PAdicScalar::from_digits(3, 0, {1, 2}, 2);
  CHECK(x.abs_precision() == 2);
  CHECK_THROWS_AS(x.digit(2), PrecisionError);
  const PAdicScalar z = sub(x, x);
  CHECK(z.is_zero());
  CHECK_FALSE(z.is_exact_zero());
  CHECK_THROWS_AS(z.valuation(), DomainError);
  CHECK_THROWS_AS(add(PAdicScalar::from_int(2, 1), PAdicScalar::from_int(3, 1)), ConfigError);
}

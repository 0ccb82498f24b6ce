#include "hrg/model.hpp"

#include <string>

#include "hrg/error.hpp"

namespace hrg {

namespace {

bool is_prime(int n) {
  if (n < 2) return false;
  for (int q = 2; q * q <= n; ++q)
    if (n % q == 0) return false;
  return true;
}

}  // namespace

void ModelParams::validate() const {
  if (!is_prime(p)) throw ConfigError("p must be a prime, got " + std::to_string(p));
  if (d < 1) throw ConfigError("d must be at least 1");
  if (!(eps >= 0.0 && eps < d)) throw ConfigError("eps must satisfy 0 <= eps < d");
  if (ipow(p, d) > (1 << 20)) throw ConfigError("p^d too large");
}

}  // namespace hrg

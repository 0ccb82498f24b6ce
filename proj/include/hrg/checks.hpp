#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrg/mobius.hpp"

namespace hrg {

// Outcome of a batch of seeded identity checks.
struct IdentityTally {
  std::string name;
  int trials = 0;
  int passed = 0;
  int redraws = 0;                    // samples rejected before checking (poles, shared unit balls)
  std::vector<std::string> failures;  // first few failing cases, printable

  bool ok() const { return passed == trials; }
};

struct ConformalCheckOptions {
  int trials = 1000;
  std::uint64_t seed = 1;
  // Draw (p, d) per trial from {2,3,5} x {1,2} unless fixed here.
  std::optional<int> p, d;
  // Use this word instead of random words (text form, needs p and d).
  std::optional<std::string> word;
  int word_length = 6;
  double eps = 0.0;  // [phi] for the covariance check
};

// CR(fx) = CR(x) for random quadruples and words.
IdentityTally cross_ratio_invariance(const ConformalCheckOptions& opt);
// CR = p^(-delta) for random window quadruples (one slot may be infinity).
IdentityTally mmd_identity(const ConformalCheckOptions& opt);
// |Jx - Jy| = |x - y| / (|x| |y|).
IdentityTally inversion_identity(const ConformalCheckOptions& opt);
// Covariance of the uncut Gaussian field transforms with weight [phi].
IdentityTally gaussian_mobius_covariance(const ConformalCheckOptions& opt);

std::vector<IdentityTally> conformal_checks(const ConformalCheckOptions& opt);

}  // namespace hrg

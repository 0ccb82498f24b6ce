#pragma once

#include <cmath>
#include <cstdint>

namespace hrg {

// Layer-k fluctuations have variance proportional to p^(-kLayerVarianceExponent*[phi]).
// The value 2 is what makes the two-point function decay like |x-y|^(-2[phi]).
inline constexpr double kLayerVarianceExponent = 2.0;

inline std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Prime, dimension and epsilon of the hierarchical model.
struct ModelParams {
  int p = 2;
  int d = 3;
  double eps = 0.0;

  double dim_phi() const { return (d - eps) / 4.0; }
  int block() const { return static_cast<int>(ipow(p, d)); }

  // Per-unit scale of layer-k fluctuations: sigma_k^2 = p^(-2k[phi]).
  double layer_variance(int k) const {
    return std::pow(static_cast<double>(p), -kLayerVarianceExponent * k * dim_phi());
  }
  // Variance of a single vertex variable at layer k.
  double vertex_variance(int k) const { return (1.0 - 1.0 / block()) * layer_variance(k); }
  // Sum of vertex variances over layers >= k: the variance of the field
  // accumulated from layer k upward.
  double tail_variance(int k) const {
    return vertex_variance(k) / (1.0 - layer_variance(1));
  }
  // Pointwise variance with UV cutoff at layer 0; also the Wick reference.
  double wick_variance() const { return tail_variance(0); }
  // C(x,y) = c0 |x-y|^(-2[phi]) without UV cutoff.
  double c0() const {
    return tail_variance(0) - std::pow(static_cast<double>(p), kLayerVarianceExponent * dim_phi() - d);
  }

  void validate() const;
};

}  // namespace hrg

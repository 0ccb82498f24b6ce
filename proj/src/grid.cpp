#include "hrg/grid.hpp"

#include <cmath>

#include "hrg/error.hpp"

namespace hrg {

SymmetricGrid::SymmetricGrid(int n, double phi_max) : n_(n), phi_max_(phi_max) {
  if (n < 5 || n % 2 == 0) throw ConfigError("grid size must be odd and at least 5");
  if (!(phi_max > 0.0)) throw ConfigError("grid half-width must be positive");
  h_ = 2.0 * phi_max / (n - 1);
}

Stencil SymmetricGrid::stencil(double x) const {
  Stencil s;
  if (x <= -phi_max_ || x >= phi_max_) {
    // Linear continuation through the two outermost nodes.
    const bool left = x <= -phi_max_;
    const int i0 = left ? 0 : n_ - 2;
    const double t = (x - node(i0)) / h_;
    s.n = 2;
    s.idx = {i0, i0 + 1, 0, 0};
    s.w = {1.0 - t, t, 0.0, 0.0};
    return s;
  }
  int i = static_cast<int>(std::floor((x + phi_max_) / h_));
  int i0 = i - 1;
  if (i0 < 0) i0 = 0;
  if (i0 > n_ - 4) i0 = n_ - 4;
  const double t = (x - node(i0)) / h_;  // nodes at t = 0,1,2,3
  const double t0 = t, t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
  s.n = 4;
  s.idx = {i0, i0 + 1, i0 + 2, i0 + 3};
  s.w = {-t1 * t2 * t3 / 6.0, t0 * t2 * t3 / 2.0, -t0 * t1 * t3 / 2.0, t0 * t1 * t2 / 6.0};
  return s;
}

double SymmetricGrid::interpolate(const std::vector<double>& values, double x) const {
  const Stencil s = stencil(x);
  double v = 0.0;
  for (int k = 0; k < s.n; ++k) v += s.w[k] * values[s.idx[k]];
  return v;
}

}  // namespace hrg

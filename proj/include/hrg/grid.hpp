#pragma once

#include <array>
#include <vector>

namespace hrg {

// Interpolation stencil: value(x) = sum_k w[k] * values[idx[k]].
struct Stencil {
  std::array<int, 4> idx{};
  std::array<double, 4> w{};
  int n = 0;
};

// Uniform grid on [-phi_max, phi_max] with an odd number of nodes, so that
// the centre node sits exactly at 0. Off-grid values use 4-point Lagrange
// interpolation; outside the grid the two edge nodes are extrapolated linearly.
class SymmetricGrid {
 public:
  SymmetricGrid() = default;
  SymmetricGrid(int n, double phi_max);

  int size() const { return n_; }
  int center() const { return (n_ - 1) / 2; }
  double phi_max() const { return phi_max_; }
  double spacing() const { return h_; }
  double node(int i) const { return -phi_max_ + i * h_; }

  Stencil stencil(double x) const;
  double interpolate(const std::vector<double>& values, double x) const;

  // Same node count, every node multiplied by s.
  SymmetricGrid scaled(double s) const { return SymmetricGrid(n_, phi_max_ * s); }

 private:
  int n_ = 0;
  double phi_max_ = 0.0;
  double h_ = 0.0;
};

}  // namespace hrg

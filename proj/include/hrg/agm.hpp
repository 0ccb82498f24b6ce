#pragma once

#include <vector>

namespace hrg {

struct AgmVector {
  double a = 1.0;
  double b = 1.0;
};

// Z(a, b) = int_0^{pi/2} (a^2 cos^2 t + b^2 sin^2 t)^(-1/2) dt by adaptive
// Gauss-Kronrod quadrature.
double elliptic_Z(const AgmVector& v, double tol = 1e-12);

// (a, b) -> ((a + b) / 2, sqrt(ab)).
AgmVector rg_agm(const AgmVector& v);

struct AgmIteration {
  int step = 0;
  AgmVector v;
  double gap = 0.0;
};

double agm_limit(const AgmVector& v, double tol = 1e-15, std::vector<AgmIteration>* log = nullptr);

}  // namespace hrg

#include "hrg/agm.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hrg/error.hpp"

namespace hrg {

namespace {

void check(const AgmVector& v) {
  if (!(v.a > 0.0 && v.b > 0.0 && std::isfinite(v.a) && std::isfinite(v.b)))
    throw DomainError("AGM needs positive finite a and b");
}

}  // namespace

double elliptic_Z(const AgmVector& v, double tol) {
  check(v);
  auto f = [&](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return 1.0 / std::sqrt(v.a * v.a * c * c + v.b * v.b * s * s);
  };
  double err = 0.0;
  // The relative tolerance is tightened so the absolute error stays below tol
  // for the magnitudes of Z we see (Z <= pi / (2 min(a, b))).
  const double scale = std::numbers::pi / (2.0 * std::min(v.a, v.b));
  const double z = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numbers::pi / 2, 20, std::max(tol / scale, 1e-14), &err);
  if (!std::isfinite(z)) throw NumericError("elliptic integral quadrature failed");
  return z;
}

AgmVector rg_agm(const AgmVector& v) {
  check(v);
  return {(v.a + v.b) / 2.0, std::sqrt(v.a * v.b)};
}

double agm_limit(const AgmVector& v, double tol, std::vector<AgmIteration>* log) {
  check(v);
  AgmVector x = v;
  for (int step = 0; step < 100; ++step) {
    const double gap = std::abs(x.a - x.b);
    if (log) log->push_back({step, x, gap});
    if (gap <= tol * std::max(1.0, std::abs(x.a))) return (x.a + x.b) / 2.0;
    const AgmVector next = rg_agm(x);
    if (next.a == x.a && next.b == x.b) return (x.a + x.b) / 2.0;
    x = next;
  }
  throw NumericError("AGM iteration did not converge");
}

}  // namespace hrg

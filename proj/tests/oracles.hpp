#pragma once

// Reference computations used only by the tests. They deliberately avoid the
// library's integration code.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Probabilists' Gauss-Hermite rule (weight exp(-x^2/2)/sqrt(2 pi)) by
// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of He_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) j(i, i + 1) = j(i + 1, i) = std::sqrt(static_cast<double>(i + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()[i];
    const double v = es.eigenvectors()(0, i);
    w[i] = v * v;
  }
  return {x, w};
}

// E[f(X)], X ~ N(0, var), by the trapezoid rule on +-width standard
// deviations. Spectrally accurate for smooth integrands.
inline double gauss_expect(double var, const std::function<double(double)>& f, int n = 4001, double width = 14.0) {
  const double s = std::sqrt(var);
  const double h = 2.0 * width / (n - 1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = -width + i * h;
    const double wgt = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc += wgt * std::exp(-0.5 * z * z) * f(s * z);
  }
  return acc * h / std::sqrt(2.0 * std::numbers::pi);
}

// Orthonormal basis of the hyperplane sum = 0 in R^b (columns).
inline Eigen::MatrixXd zero_sum_basis(int b) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(b, b);
  a.col(0).setOnes();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(b - 1);
}

// E[g(zeta)] over the zero-sum Gaussian with covariance sigma^2 (I - 11^T/b),
// by tensor Gauss-Hermite in b - 1 dimensions.
inline double zero_sum_expect(int b, double sigma, const std::function<double(const std::vector<double>&)>& g,
                              int n) {
  const auto [x, w] = gauss_hermite(n);
  const Eigen::MatrixXd q = zero_sum_basis(b);
  const int dim = b - 1;
  std::vector<int> idx(dim, 0);
  std::vector<double> zeta(b);
  double acc = 0.0;
  while (true) {
    double weight = 1.0;
    for (int i = 0; i < b; ++i) zeta[i] = 0.0;
    for (int k = 0; k < dim; ++k) {
      weight *= w[idx[k]];
      for (int i = 0; i < b; ++i) zeta[i] += sigma * q(i, k) * x[idx[k]];
    }
    acc += weight * g(zeta);
    int k = 0;
    while (k < dim && ++idx[k] == n) idx[k++] = 0;
    if (k == dim) break;
  }
  return acc;
}

// One-block window with b leaves, pointwise law phi_i = u + xi_i where u ~
// N(0, root_var) and xi_i i.i.d. N(0, 1). The root field plus a zero-sum
// block of unit variance has this covariance, so every moment of
// prod_i exp(log_f(phi_i)) reduces to nested one-dimensional integrals.
struct OneBlockMixture {
  int b;
  double root_var;
  std::function<double(double)> log_f;

  double inner(double u, int power) const {
    return gauss_expect(1.0, [&](double xi) { return std::pow(u + xi, power) * std::exp(log_f(u + xi)); }, 801, 12.0);
  }
  // E[phi_0^n0 phi_1^n1 prod_i F(phi_i)], unnormalized.
  double moment(int n0, int n1) const {
    return gauss_expect(root_var, [&](double u) {
      return inner(u, n0) * inner(u, n1) * std::pow(inner(u, 0), b - 2);
    }, 801, 12.0);
  }
};

}  // namespace oracle

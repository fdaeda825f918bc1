#include "anisocrit/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

#include "anisocrit/error.hpp"

namespace anisocrit {

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Gauss rule needs at least one point");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussRule rule;
  const double half = 0.5 * (b - a);
  rule.nodes = (a + b) / 2.0 + half * eig.eigenvalues().array();
  rule.weights = 2.0 * half * eig.eigenvectors().row(0).transpose().array().square();
  return rule;
}

double sphere_area(int m) {
  return 2.0 * std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0);
}

}  // namespace anisocrit

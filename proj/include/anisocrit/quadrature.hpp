#ifndef ANISOCRIT_QUADRATURE_HPP
#define ANISOCRIT_QUADRATURE_HPP

#include <Eigen/Core>

namespace anisocrit {

struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [a, b] (Golub-Welsch).
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Surface measure of the unit sphere S^{m-1} in R^m.
double sphere_area(int m);

}  // namespace anisocrit

#endif  // ANISOCRIT_QUADRATURE_HPP

#ifndef ANISOCRIT_EXTREMALS_HPP
#define ANISOCRIT_EXTREMALS_HPP

// Extremal profiles U(x) = (lambda^{1/(p-1)} c / (lambda^{p'} + H0^(x - x0)^{p'}))^{(N-p)/p},
// whole-space constants K1, K2 and the boundary-strip integrals near a curved
// boundary point.

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <vector>

#include "anisocrit/anisotropy.hpp"
#include "anisocrit/discretization.hpp"
#include "anisocrit/radial_integrals.hpp"

namespace anisocrit {

/// N^{1/p} ((N-p)/(p-1))^{(p-1)/p}
double kappa(double p, int N);

/// Extremal: c = kappa, so -div a(grad U) = U^{p*-1}.
/// UnitProfile: c = 1, so U^{p*} = (1 + r^{p'})^{-N} at lambda = 1.
enum class Amplitude { Extremal, UnitProfile };

const char* to_string(Amplitude a);

struct ExtremalSpec {
  int N = 3;
  double p = 2.0;
  double lambda = 1.0;
  Eigen::VectorXd center;
  std::shared_ptr<const DualNorm<double>> dual;
  Amplitude amplitude = Amplitude::Extremal;

  double amplitude_constant() const;  // c
  void validate() const;
};

ExtremalSpec make_extremal(int N, double p, double lambda, Eigen::VectorXd center,
                           std::shared_ptr<const DualNorm<double>> dual,
                           Amplitude amplitude = Amplitude::Extremal);

/// Concentration scale lambda = eps^{(p-1)/p}.
double eps_scale(double eps, double p);
ExtremalSpec u_eps(int N, double p, double eps, Eigen::VectorXd center,
                   std::shared_ptr<const DualNorm<double>> dual,
                   Amplitude amplitude = Amplitude::Extremal);

double extremal_value(const ExtremalSpec& spec, const Eigen::VectorXd& x);
/// Radial profile as a function of rho = H0^(x - x0).
double extremal_profile(const ExtremalSpec& spec, double rho);
/// dU/drho
double extremal_profile_derivative(const ExtremalSpec& spec, double rho);
/// Zero at the center.
Eigen::VectorXd extremal_gradient(const ExtremalSpec& spec, const Eigen::VectorXd& x);

struct WholeSpaceConstants {
  double K1 = 0;  // int H(grad U)^p over R^N
  double K2 = 0;  // int U^{p*}
  double S = 0;   // K1 / K2^{p/p*}
};

/// Radial reduction, euclidean H only (UnsupportedReduction otherwise).
/// BetaClosedForm goes through the radial moments; AdaptiveQuadrature
/// integrates the actual profile at the spec's lambda.
WholeSpaceConstants whole_space_constants(const ExtremalSpec& spec,
                                          MomentMethod method = MomentMethod::BetaClosedForm);
/// Unit-amplitude constants for (N, p), euclidean H.
WholeSpaceConstants whole_space_constants(int N, double p);

struct GridQuadratureOptions {
  int points_per_axis = 32;
  double radius = 50.0;   // truncation radius in H0^, in units of lambda
  double grading = 6.0;   // x = R sinh(c s) / sinh(c)
};

/// Tensor Gauss-Legendre quadrature of K1, K2 over {H0^(x - x0) < radius}; any norm.
WholeSpaceConstants grid_quadrature_constants(const ExtremalSpec& spec,
                                              const GridQuadratureOptions& options = {});

/// C^1 radial cutoff: 1 for H0^ <= inner, 0 for H0^ >= outer.
struct Cutoff {
  double inner;
  double outer;
  double operator()(double rho) const;
};

/// Nodal interpolant of U (optionally times a cutoff) on a mesh.
GridFunction interpolate_extremal(const ExtremalSpec& spec, std::shared_ptr<const Mesh> mesh,
                                  std::optional<Cutoff> cutoff = std::nullopt);

/// int H(grad u)^p / (int |u|^{p*})^{p/p*}; ZeroFunction when u vanishes.
double sobolev_quotient(const GridFunction& u, double p, const Norm<double>& norm);

struct HalfSpaceQuotient {
  double lambda = 0;
  Cutoff cutoff{0, 0};
  double quotient = 0;
  double S = 0;
  double reference = 0;  // 2^{-p/N} S
  double ratio = 0;      // quotient / reference
};

/// Truncated euclidean extremal centered at the origin of a mesh whose domain
/// has its flat face on x_N = 0 (a half-ball), i.e. the restriction of a
/// function even in x_N. Its quotient against 2^{-p/N} S.
HalfSpaceQuotient half_space_quotient(double p, std::shared_ptr<const Mesh> mesh, double lambda, Cutoff cutoff);

// ---------------------------------------------------------------------------
// Boundary strip near x0 = 0 with Omega = {x_N > g(x')}, g = 1/2 sum alpha_i x_i^2

struct StripOptions {
  Amplitude amplitude = Amplitude::UnitProfile;
  double model_radius = 1.0;  // radius of the ball used for K3(eps)
  int inner_points = 32;
  int angular_points = 24;
  double tolerance = 1e-9;
};

struct EpsilonEstimates {
  double eps = 0;
  double lambda = 0;
  double K1eps = 0;  // K1/2 - I
  double K2eps = 0;  // K2/2 - II
  double K3eps = 0;  // int over B_R cap Omega of u^p
  double I = 0;      // int over the strip 0 < x_N < g(x') of |grad u|^p
  double II = 0;     // same for u^{p*}
  double I_scaled = 0;   // eps^{-(p-1)/p} I
  double II_scaled = 0;  // eps^{-(p-1)/p} II
  double ratio = 0;      // I / II
};

EpsilonEstimates boundary_strip_integrals(int N, double p, double eps, const std::vector<double>& alpha,
                                          const StripOptions& options = {});

struct StripLimits {
  double I_scaled = 0;
  double II_scaled = 0;
  double ratio = 0;
};

/// eps -> 0 limits of the scaled strip integrals; needs N > 2p - 1.
StripLimits strip_limits(int N, double p, const std::vector<double>& alpha,
                         Amplitude amplitude = Amplitude::UnitProfile);

}  // namespace anisocrit

#endif  // ANISOCRIT_EXTREMALS_HPP

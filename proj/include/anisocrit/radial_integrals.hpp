#ifndef ANISOCRIT_RADIAL_INTEGRALS_HPP
#define ANISOCRIT_RADIAL_INTEGRALS_HPP

// Radial moments M(k, p, N) = int_0^inf r^k (1 + r^{p/(p-1)})^{-N} dr.

namespace anisocrit {

enum class MomentMethod { BetaClosedForm, AdaptiveQuadrature };

struct RadialMoment {
  double k = 0;
  double p = 0;
  int N = 0;
  double value = 0;
  MomentMethod method = MomentMethod::BetaClosedForm;
  double error_estimate = 0;  // absolute; zero for the closed form
};

/// p/(p-1)
double conjugate(double p);

/// 0 < (k+1)(p-1)/p < N; outside it the moment diverges.
bool in_validity_window(double k, double p, int N);

/// Closed form ((p-1)/p) B(a, N-a), a = (k+1)(p-1)/p, via log-Gamma; or adaptive
/// tanh-sinh on [0,1] and on the tail mapped by r = 1/t, rel. tol 1e-10.
RadialMoment radial_moment(double k, double p, int N,
                           MomentMethod method = MomentMethod::BetaClosedForm);

/// |M(k) - c(k) M(k - p/(p-1))| / M(k) with c(k) = ((p-1)k - 1)/(pN - (p-1) - (p-1)k).
/// Requires p/(p-1) <= k <= pN/(p-1) and both moments inside the window.
double moment_recursion_residual(double k, double p, int N);

/// M(N + p/(p-1)) / M(N); checked against (p-1)(N+1)/(N-(2p-1)). Needs N > 2p-1.
double moment_ratio_high(double p, int N);

/// (N-p)^p (N+1) / ((p-1)^{p-1} (N-(2p-1))); checked against
/// ((N-p)/(p-1))^p * moment_ratio_high(p, N).
double limit_I_over_II(double p, int N);

struct ScaledRatio {
  double value;        // closed form
  double via_moments;  // (N-p)/N ((N-p)/(p-1))^p M(N-1+p')/M(N-1)
  double rel_diff;
};

/// (N-p)^p / (p-1)^{p-1}, which equals (N-p) K1 / (N K2) for the unit-amplitude
/// extremal profile. The moment route is evaluated alongside it.
ScaledRatio K1_over_K2_scaled(double p, int N);

}  // namespace anisocrit

#endif  // ANISOCRIT_RADIAL_INTEGRALS_HPP

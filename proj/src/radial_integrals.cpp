#include "anisocrit/radial_integrals.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <sstream>

#include "anisocrit/error.hpp"

namespace anisocrit {

namespace {

constexpr double kQuadratureTolerance = 1e-10;
constexpr double kIdentityTolerance = 1e-10;

void require_parameters(double p, int N) {
  if (!(p > 1.0) || !(p < N) || N < 3) {
    std::ostringstream os;
    os << "radial moment needs 1 < p < N and N >= 3 (p=" << p << ", N=" << N << ")";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
}

void require_window(double k, double p, int N) {
  if (!in_validity_window(k, p, N)) {
    std::ostringstream os;
    os << "moment diverges: (k+1)(p-1)/p = " << (k + 1.0) / conjugate(p) << " outside (0, " << N
       << ") for k=" << k << ", p=" << p;
    throw Error(ErrorKind::DivergentIntegral, os.str());
  }
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

double conjugate(double p) { return p / (p - 1.0); }

bool in_validity_window(double k, double p, int N) {
  const double a = (k + 1.0) / conjugate(p);
  return a > 0.0 && a < static_cast<double>(N);
}

RadialMoment radial_moment(double k, double p, int N, MomentMethod method) {
  require_parameters(p, N);
  require_window(k, p, N);
  const double pc = conjugate(p);
  RadialMoment m{k, p, N, 0.0, method, 0.0};
  if (method == MomentMethod::BetaClosedForm) {
    const double a = (k + 1.0) / pc;
    m.value = std::exp(log_beta(a, N - a)) / pc;
    return m;
  }
  // split at r = 1; the tail becomes int_0^1 t^{N p' - k - 2} (1 + t^{p'})^{-N} dt under r = 1/t.
  // Each piece int_0^1 x^a (1 + x^{p'})^{-N} dx is taken in u = x^{a+1}, which removes x^a.
  auto piece = [pc, N](double a) {
    const double m = 1.0 / (a + 1.0);
    auto f = [m, pc, N](double u) {
      if (u <= 0.0) return m;
      return m * std::exp(-N * std::log1p(std::exp(m * pc * std::log(u))));
    };
    boost::math::quadrature::tanh_sinh<double> rule;
    double err = 0.0;
    const double v = rule.integrate(f, 0.0, 1.0, kQuadratureTolerance, &err);
    return std::pair{v, err};
  };
  const auto [head, head_err] = piece(k);
  const auto [tail, tail_err] = piece(N * pc - k - 2.0);
  m.value = head + tail;
  const double error = head_err + tail_err;
  m.error_estimate = error;
  return m;
}

double moment_recursion_residual(double k, double p, int N) {
  require_parameters(p, N);
  const double pc = conjugate(p);
  if (k < pc || k > pc * N) {
    std::ostringstream os;
    os << "recursion needs p/(p-1) <= k <= pN/(p-1); got k=" << k;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  require_window(k, p, N);
  require_window(k - pc, p, N);
  const double denom = p * N - (p - 1.0) - (p - 1.0) * k;
  const double factor = ((p - 1.0) * k - 1.0) / denom;
  const double lhs = radial_moment(k, p, N).value;
  const double rhs = factor * radial_moment(k - pc, p, N).value;
  return std::abs(lhs - rhs) / lhs;
}

double moment_ratio_high(double p, int N) {
  require_parameters(p, N);
  if (!(N > 2.0 * p - 1.0)) {
    std::ostringstream os;
    os << "moment_ratio_high needs N > 2p-1 (N=" << N << ", p=" << p << ")";
    throw Error(ErrorKind::DivergentIntegral, os.str());
  }
  const double pc = conjugate(p);
  const double ratio = radial_moment(N + pc, p, N).value / radial_moment(N, p, N).value;
  const double closed = (p - 1.0) * (N + 1.0) / (N - (2.0 * p - 1.0));
  if (relative(ratio, closed) > kIdentityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "moment ratio " << ratio << " disagrees with closed form " << closed;
    throw Error(ErrorKind::Consistency, os.str());
  }
  return ratio;
}

double limit_I_over_II(double p, int N) {
  require_parameters(p, N);
  if (!(N > 2.0 * p - 1.0)) {
    std::ostringstream os;
    os << "limit_I_over_II needs N > 2p-1 (N=" << N << ", p=" << p << ")";
    throw Error(ErrorKind::DivergentIntegral, os.str());
  }
  const double closed = std::pow(N - p, p) * (N + 1.0) /
                        (std::pow(p - 1.0, p - 1.0) * (N - (2.0 * p - 1.0)));
  const double via_ratio = std::pow((N - p) / (p - 1.0), p) * moment_ratio_high(p, N);
  if (relative(via_ratio, closed) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "I/II limit " << closed << " disagrees with moment route " << via_ratio;
    throw Error(ErrorKind::Consistency, os.str());
  }
  return closed;
}

ScaledRatio K1_over_K2_scaled(double p, int N) {
  require_parameters(p, N);
  const double pc = conjugate(p);
  ScaledRatio out{};
  out.value = std::pow(N - p, p) / std::pow(p - 1.0, p - 1.0);
  out.via_moments = (N - p) / N * std::pow((N - p) / (p - 1.0), p) *
                    radial_moment(N - 1.0 + pc, p, N).value / radial_moment(N - 1.0, p, N).value;
  out.rel_diff = relative(out.via_moments, out.value);
  if (out.rel_diff > 1e-8) {
    std::ostringstream os;
    os.precision(17);
    os << "(N-p)K1/(N K2) = " << out.via_moments << " disagrees with " << out.value;
    throw Error(ErrorKind::Consistency, os.str());
  }
  return out;
}

}  // namespace anisocrit
